#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "intlace/report.hpp"

namespace intlace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Key-value run configuration. Every typed read records the resolved value
// (default or explicit), and the full resolved set is embedded in reports.
class ExperimentConfig {
 public:
  std::string experiment;
  uint64_t seed = 20260808;
  int workers = 1;
  std::string out_dir = "out";
  std::string cache_dir = "green_cache";

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_text(const std::string& text);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  double num(const std::string& key, double def) const;
  int integer(const std::string& key, int def) const;
  std::string str(const std::string& key, const std::string& def) const;
  std::vector<double> list(const std::string& key, const std::vector<double>& def) const;

  const std::map<std::string, std::string>& resolved() const { return resolved_; }
  void note(const std::string& key, const std::string& value) const {
    resolved_[key] = value;
  }
  uint64_t hash() const;

  // keys that were set but never read indicate a typo in the config file
  std::vector<std::string> unread_keys() const;

 private:
  std::map<std::string, std::string> kv_;
  mutable std::map<std::string, std::string> resolved_;
  mutable std::map<std::string, bool> read_;
};

using ExperimentFn = ExperimentReport (*)(const ExperimentConfig&);

const std::map<std::string, ExperimentFn>& experiment_registry();
std::vector<std::string> experiment_names();

// Dispatches by cfg.experiment, embeds provenance, rejects unknown ids and
// unread config keys (ConfigError).
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace intlace
