#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "intlace/stats.hpp"

namespace intlace {

struct PlotSeries {
  std::string name;                      // file stem under plotdata/
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Full record of one experiment run: resolved config, provenance, verdicts,
// and plot-ready columns. Serialization is byte-stable for a fixed build.
struct ExperimentReport {
  std::string experiment;
  std::string build_id;
  uint64_t seed = 0;
  int workers = 1;
  uint64_t config_hash = 0;
  std::map<std::string, std::string> config;  // resolved key -> value
  std::vector<Verdict> verdicts;              // gating
  std::vector<Verdict> diagnostics;           // reported, non-gating
  std::vector<PlotSeries> plots;

  bool all_pass() const;

  std::string to_json() const;
  std::string to_csv() const;

  // writes report.json, report.csv, plotdata/<series>.csv
  void write(const std::string& out_dir) const;
};

uint64_t fnv1a_hash(const std::string& s);
std::string format_double(double v);  // shortest round-trip, deterministic

}  // namespace intlace
