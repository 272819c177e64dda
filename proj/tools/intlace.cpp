#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "intlace/experiments.hpp"
#include "intlace/parallel.hpp"

// Exit codes: 0 all gating verdicts pass, 1 gating failure, 2 config/usage
// error, 3 oracle domain violation.
int main(int argc, char** argv) {
  CLI::App app{"intlace: interlacement and free-field simulation lab"};
  std::string config_path, out_dir, cache_dir;
  long long seed = -1;
  int workers = 0;
  bool list = false;
  app.add_option("-c,--config", config_path, "experiment config file (key = value lines)");
  app.add_option("-s,--seed", seed, "seed override");
  app.add_option("-w,--workers", workers, "worker threads (0 = hardware)");
  app.add_option("-o,--out", out_dir, "output directory override");
  app.add_option("--cache-dir", cache_dir, "Green-table cache directory");
  app.add_flag("--list-experiments", list, "list experiment ids and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list) {
    for (const auto& name : intlace::experiment_names()) std::printf("%s\n", name.c_str());
    return 0;
  }
  if (config_path.empty()) {
    std::fprintf(stderr, "error: --config is required (or --list-experiments)\n");
    return 2;
  }

  try {
    intlace::ExperimentConfig cfg = intlace::ExperimentConfig::from_file(config_path);
    if (seed >= 0) cfg.seed = uint64_t(seed);
    if (workers > 0)
      cfg.workers = workers;
    else if (cfg.workers <= 0)
      cfg.workers = intlace::default_workers();
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;

    intlace::ExperimentReport rep = intlace::run_experiment(cfg);
    rep.write(cfg.out_dir);
    int failed = 0;
    for (const auto& v : rep.verdicts) {
      std::printf("[%s] %s %s value=%.6g oracle=%.6g se=%.3g\n",
                  v.pass ? "PASS" : "FAIL", v.statistic.c_str(), v.context.c_str(),
                  v.value, v.oracle, v.se);
      if (!v.pass) ++failed;
    }
    std::printf("%s: %zu verdicts, %d failed; report in %s\n", cfg.experiment.c_str(),
                rep.verdicts.size(), failed, cfg.out_dir.c_str());
    return failed == 0 ? 0 : 1;
  } catch (const intlace::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "oracle domain error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
