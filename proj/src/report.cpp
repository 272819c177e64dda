#include "intlace/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace intlace {

uint64_t fnv1a_hash(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool ExperimentReport::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

namespace {

nlohmann::ordered_json verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["statistic"] = v.statistic;
  j["context"] = v.context;
  j["value"] = v.value;
  j["oracle"] = v.oracle;
  j["se"] = v.se;
  j["tol_se"] = v.tol_se;
  j["allowance"] = v.allowance;
  j["pass"] = v.pass;
  return j;
}

}  // namespace

std::string ExperimentReport::to_json() const {
  // the worker count is execution detail, deliberately not serialized:
  // reports must be byte-identical for any scheduling
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["build_id"] = build_id;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  j["pass"] = all_pass();
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) vs.push_back(verdict_json(v));
  j["verdicts"] = vs;
  nlohmann::ordered_json ds = nlohmann::ordered_json::array();
  for (const auto& v : diagnostics) ds.push_back(verdict_json(v));
  j["diagnostics"] = ds;
  return j.dump(2) + "\n";
}

std::string ExperimentReport::to_csv() const {
  std::string out =
      "experiment,kind,statistic,context,value,oracle,se,tol_se,allowance,pass\n";
  auto row = [&](const char* kind, const Verdict& v) {
    out += experiment + ',' + kind + ',' + v.statistic + ',' + v.context + ',' +
           format_double(v.value) + ',' + format_double(v.oracle) + ',' +
           format_double(v.se) + ',' + format_double(v.tol_se) + ',' +
           format_double(v.allowance) + ',' + (v.pass ? "1" : "0") + '\n';
  };
  for (const auto& v : verdicts) row("verdict", v);
  for (const auto& v : diagnostics) row("diagnostic", v);
  return out;
}

void ExperimentReport::write(const std::string& out_dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "report.json", std::ios::binary);
    f << to_json();
  }
  {
    std::ofstream f(fs::path(out_dir) / "report.csv", std::ios::binary);
    f << to_csv();
  }
  if (!plots.empty()) {
    fs::create_directories(fs::path(out_dir) / "plotdata");
    for (const auto& p : plots) {
      std::ofstream f(fs::path(out_dir) / "plotdata" / (p.name + ".csv"),
                      std::ios::binary);
      for (size_t i = 0; i < p.columns.size(); ++i)
        f << p.columns[i] << (i + 1 < p.columns.size() ? "," : "\n");
      for (const auto& r : p.rows) {
        for (size_t i = 0; i < r.size(); ++i)
          f << format_double(r[i]) << (i + 1 < r.size() ? "," : "\n");
      }
    }
  }
}

}  // namespace intlace
