// Acceptance suite: end-to-end statistical verification of the library
// against its closed-form oracles, at the tolerances fixed below. Each case
// prints one PASS/FAIL line; the whole binary is wired into ctest.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "intlace/experiments.hpp"
#include "intlace/parallel.hpp"

using namespace intlace;

namespace {

constexpr uint64_t kSeed = 20260808;

ExperimentConfig make_cfg(const std::string& text) {
  ExperimentConfig cfg = ExperimentConfig::from_text(text);
  cfg.seed = kSeed;
  cfg.workers = default_workers();
  cfg.cache_dir = "acceptance_green_cache";
  return cfg;
}

bool run_and_print(int criterion, const std::string& label, const std::string& cfg_text,
                   ExperimentReport* out = nullptr) {
  ExperimentConfig cfg = make_cfg(cfg_text);
  ExperimentReport rep = run_experiment(cfg);
  bool pass = rep.all_pass();
  std::printf("[%s] criterion %02d: %s (%zu verdicts)\n", pass ? "PASS" : "FAIL",
              criterion, label.c_str(), rep.verdicts.size());
  for (const auto& v : rep.verdicts)
    if (!v.pass)
      std::printf("         failed: %s %s value=%.8g oracle=%.8g se=%.3g tol=%g+%g\n",
                  v.statistic.c_str(), v.context.c_str(), v.value, v.oracle, v.se,
                  v.tol_se, v.allowance);
  if (out) *out = rep;
  return pass;
}

}  // namespace

TEST_CASE("criterion 1: green sanity") {
  CHECK(run_and_print(1, "g(0) quadrature/table agreement and harmonicity",
                      "experiment = green-sanity\n"));
}

TEST_CASE("criterion 2: mean occupation") {
  CHECK(run_and_print(2, "E[L_{x,u}] = u on the 5^3 box, exact vs truncated",
                      "experiment = mean-occupation\n"
                      "window_radius = 2\n"
                      "u_list = 0.5 1\n"
                      "n = 10000\n"));
}

TEST_CASE("criterion 3: lattice Laplace functional") {
  CHECK(run_and_print(3, "empirical MGF vs the resolvent exponent, N=1 u=0.5",
                      "experiment = lattice-laplace\n"
                      "u = 0.5\n"
                      "N = 1\n"
                      "n = 100000\n"));
}

TEST_CASE("criterion 4: finite-N variance exactness") {
  CHECK(run_and_print(4, "Var<L-hat^N,V> = <V,G_N V> at N in {4,8}, u_N = sqrt(N)",
                      "experiment = high-intensity-limit\n"
                      "mode = variance\n"
                      "N_list = 4 8\n"
                      "u_exponent = 0.5\n"
                      "n = 100000\n"));
}

TEST_CASE("criterion 5: high-intensity gaussianity via the third cumulant") {
  CHECK(run_and_print(5, "third cumulant exact and halving across u in {1,4,16}",
                      "experiment = high-intensity-limit\n"
                      "mode = cumulant\n"
                      "N = 4\n"
                      "u_list = 1 4 16\n"
                      "n = 40000\n"));
}

TEST_CASE("criterion 6: constant-intensity limit") {
  CHECK(run_and_print(6, "MGF ladder N in {2,4,8} against the continuum oracle",
                      "experiment = constant-intensity-limit\n"
                      "alpha = 0.5\n"
                      "N_list = 2 4 8\n"
                      "n = 200000\n"
                      "nystrom_spacing = 0.125\n"));
}

TEST_CASE("criterion 7: brownian occupation intensity") {
  CHECK(run_and_print(7, "E<L_alpha,V> = alpha int V with delta refinement",
                      "experiment = brownian-intensity\n"
                      "alpha = 1\n"
                      "n = 4000\n"
                      "n_refined = 1500\n"));
}

TEST_CASE("criterion 8: vacant-set capacity law") {
  CHECK(run_and_print(8, "P[empty] = exp(-pi) for the unit ball at alpha = 0.5",
                      "experiment = vacant-set-capacity\n"
                      "alpha = 0.5\n"
                      "probe_radius = 1\n"
                      "n = 200000\n"));
}

TEST_CASE("criterion 9: scaling invariance") {
  CHECK(run_and_print(9, "lambda = 2 pushforward: means and variances line up",
                      "experiment = scaling-invariance\n"
                      "alpha = 0.5\n"
                      "lambda = 2\n"
                      "n = 20000\n"));
}

TEST_CASE("criterion 10: discrete isomorphism identity") {
  CHECK(run_and_print(10, "two-sample verdicts on the 7^3 window at u = 0.5",
                      "experiment = isomorphism-discrete\n"
                      "u = 0.5\n"
                      "N = 4\n"
                      "window_radius = 3\n"
                      "n = 100000\n"));
}

TEST_CASE("criterion 11: wick identities") {
  CHECK(run_and_print(11, "lattice pair covariances and the continuum product",
                      "experiment = wick-identities\n"
                      "n = 100000\n"));
}

TEST_CASE("criterion 12: det2 MGF of the mollified field") {
  CHECK(run_and_print(12, "MC MGF vs the regularized-determinant oracle, 8^3 grid",
                      "experiment = det2-mgf\n"
                      "N = 8\n"
                      "n = 100000\n"));
}

TEST_CASE("criterion 13: variance asymptotics (deterministic)") {
  CHECK(run_and_print(13, "b_N sums: d=3 ladder to the continuum, d=5 constant",
                      "experiment = variance-asymptotics\n"
                      "N_list = 4 8 16 32\n"
                      "N_d5 = 16\n"));
}

TEST_CASE("criterion 14: continuum isomorphism probe") {
  CHECK(run_and_print(14, "means and variance identity at eps = 0.1",
                      "experiment = isomorphism-continuum-d3\n"
                      "alpha = 0.5\n"
                      "eps = 0.1\n"
                      "n_field = 25000\n"
                      "n_cloud = 20000\n"));
}

TEST_CASE("criterion 15: byte-identical reports across worker counts") {
  namespace fs = std::filesystem;
  auto run_to = [&](const std::string& dir, int workers) {
    ExperimentConfig cfg = make_cfg(
        "experiment = lattice-laplace\n"
        "n = 2000\n");
    cfg.workers = workers;
    ExperimentReport rep = run_experiment(cfg);
    rep.write(dir);
  };
  fs::path base = fs::temp_directory_path() / "intlace_acceptance_determinism";
  fs::remove_all(base);
  run_to((base / "w1").string(), 1);
  run_to((base / "w2").string(), 2);
  run_to((base / "w1b").string(), 1);
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  bool same_workers = slurp(base / "w1" / "report.json") == slurp(base / "w2" / "report.json");
  bool same_repeat = slurp(base / "w1" / "report.json") == slurp(base / "w1b" / "report.json");
  bool same_csv = slurp(base / "w1" / "report.csv") == slurp(base / "w2" / "report.csv");
  std::printf("[%s] criterion 15: byte-identical reports (workers 1 vs 2, repeat run)\n",
              same_workers && same_repeat && same_csv ? "PASS" : "FAIL");
  CHECK(same_workers);
  CHECK(same_repeat);
  CHECK(same_csv);
  fs::remove_all(base);
}
