#include "intlace/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>

#include "intlace/brownian.hpp"
#include "intlace/fields.hpp"
#include "intlace/green.hpp"
#include "intlace/mollifier.hpp"
#include "intlace/oracles.hpp"
#include "intlace/parallel.hpp"
#include "intlace/potential.hpp"
#include "intlace/rw_interlacements.hpp"
#include "intlace/stats.hpp"
#include "intlace/testfunc.hpp"
#include "intlace/version.hpp"  // generated from version.hpp.in

namespace intlace {

// ---------------------------------------------------------------------------
// config plumbing

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
    line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
    value.erase(value.begin(), std::find_if(value.begin(), value.end(), notspace));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (key == "experiment")
      cfg.experiment = value;
    else if (key == "seed")
      cfg.seed = std::stoull(value);
    else if (key == "workers")
      cfg.workers = std::stoi(value);
    else if (key == "out")
      cfg.out_dir = value;
    else if (key == "cache_dir")
      cfg.cache_dir = value;
    else
      cfg.set(key, value);
  }
  if (cfg.experiment.empty()) throw ConfigError("config: missing 'experiment = <id>'");
  return cfg;
}

double ExperimentConfig::num(const std::string& key, double def) const {
  read_[key] = true;
  auto it = kv_.find(key);
  double v = def;
  if (it != kv_.end()) {
    try {
      size_t pos;
      v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
    } catch (...) {
      throw ConfigError("config: key '" + key + "' is not a number: " + it->second);
    }
  }
  resolved_[key] = format_double(v);
  return v;
}

int ExperimentConfig::integer(const std::string& key, int def) const {
  double v = num(key, def);
  int i = int(std::llround(v));
  if (double(i) != v) throw ConfigError("config: key '" + key + "' must be an integer");
  resolved_[key] = std::to_string(i);
  return i;
}

std::string ExperimentConfig::str(const std::string& key, const std::string& def) const {
  read_[key] = true;
  auto it = kv_.find(key);
  std::string v = it != kv_.end() ? it->second : def;
  resolved_[key] = v;
  return v;
}

std::vector<double> ExperimentConfig::list(const std::string& key,
                                           const std::vector<double>& def) const {
  read_[key] = true;
  std::vector<double> v = def;
  auto it = kv_.find(key);
  if (it != kv_.end()) {
    v.clear();
    std::istringstream ss(it->second);
    double x;
    while (ss >> x) v.push_back(x);
    if (!ss.eof()) throw ConfigError("config: key '" + key + "' is not a number list");
  }
  std::string joined;
  for (size_t i = 0; i < v.size(); ++i)
    joined += (i ? " " : "") + format_double(v[i]);
  resolved_[key] = joined;
  return v;
}

uint64_t ExperimentConfig::hash() const {
  std::string canon = "experiment=" + experiment + "\nseed=" + std::to_string(seed) + "\n";
  for (const auto& [k, v] : resolved_) canon += k + "=" + v + "\n";
  return fnv1a_hash(canon);
}

std::vector<std::string> ExperimentConfig::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

// ---------------------------------------------------------------------------
// shared pieces

namespace {

constexpr double kPi = std::numbers::pi;

const GreenTable& shared_table(const ExperimentConfig& cfg, int dim, int range = 0) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, long long>, std::unique_ptr<GreenTable>> cache;
  double tol = 1e-10;
  if (range == 0) range = dim == 3 ? 64 : 16;
  std::lock_guard<std::mutex> lk(mu);
  auto key = std::make_tuple(dim, range, (long long)(tol * 1e15));
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache
             .emplace(key, std::make_unique<GreenTable>(
                               GreenTable::load_or_build(cfg.cache_dir, dim, range, tol)))
             .first;
  }
  return *it->second;
}

TestFunctionSpec config_test_function(const ExperimentConfig& cfg, int dim = 3) {
  TestFunctionSpec V;
  V.dim = dim;
  std::string kind = cfg.str("v_kind", "bump");
  if (kind == "bump")
    V.kind = TestFunctionSpec::Kind::RadialBump;
  else if (kind == "indicator")
    V.kind = TestFunctionSpec::Kind::BoxIndicator;
  else if (kind == "separable")
    V.kind = TestFunctionSpec::Kind::SeparableBump;
  else
    throw ConfigError("config: v_kind must be bump|indicator|separable");
  V.amplitude = cfg.num("v_amplitude", 0.1);
  V.radius = cfg.num("v_radius", 1.0);
  return V;
}

std::vector<double> z_grid_from_cap(double z_cap, const ExperimentConfig& cfg) {
  std::vector<double> fr = cfg.list("z_fractions", {-1.0, -0.5, 0.25, 0.5, 1.0});
  std::vector<double> out;
  for (double f : fr) out.push_back(f * z_cap);
  return out;
}

// deterministic sample array: values[i] depends only on (seed, stream, i)
template <class F>
std::vector<double> draw_values(size_t n, uint64_t seed, uint64_t stream, int workers,
                                F&& fn) {
  std::vector<double> out(n);
  parallel_for(n, workers, [&](size_t i) {
    Rng rng(derive_seed(seed, stream, i));
    out[i] = fn(rng, i);
  });
  return out;
}

void push_all(std::vector<Verdict>& dst, const std::vector<Verdict>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

ExperimentReport base_report(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.experiment = cfg.experiment;
  rep.build_id = kBuildId;
  rep.seed = cfg.seed;
  rep.workers = cfg.workers;
  return rep;
}

void finalize(ExperimentReport& rep, const ExperimentConfig& cfg) {
  rep.config = cfg.resolved();
  rep.config_hash = cfg.hash();
}

// MGF plot series with a z = 0 row
PlotSeries mgf_plot(const std::string& name, const MomentReport& mr,
                    const std::vector<double>& oracle) {
  PlotSeries s;
  s.name = name;
  s.columns = {"z", "empirical_mgf", "se", "oracle"};
  s.rows.push_back({0.0, 1.0, 0.0, 1.0});
  for (size_t i = 0; i < mr.mgf.size(); ++i)
    s.rows.push_back({mr.mgf[i].z, mr.mgf[i].value, mr.mgf[i].se, oracle[i]});
  std::sort(s.rows.begin(), s.rows.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  return s;
}

// ---------------------------------------------------------------------------
// green-sanity

ExperimentReport exp_green_sanity(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  const GreenTable& tab = shared_table(cfg, 3);
  double quad_tol = cfg.num("quad_tol", 1e-7);
  double tol_abs = cfg.num("tol_abs", 1e-6);

  double g0_oracle = green_lattice(lp3(0, 0, 0), 3, quad_tol);
  rep.verdicts.push_back(make_verdict("g0_table_vs_quadrature", tab.g0(), g0_oracle, 0,
                                      0, "d=3", tol_abs));

  // cross-route agreement on the small canonical offsets
  const LatticePoint probes[] = {lp3(1, 0, 0), lp3(1, 1, 0), lp3(1, 1, 1), lp3(2, 1, 0)};
  double max_diff = 0;
  for (const auto& p : probes)
    max_diff = std::max(max_diff, std::abs(tab.at(p) - green_lattice(p, 3, quad_tol)));
  rep.verdicts.push_back(
      make_verdict("route_agreement_|x|<=2", max_diff, 0, 0, 0, "table vs quadrature",
                   tol_abs));

  // discrete harmonicity on |x|_inf <= 10
  double max_resid = 0;
  for (const auto& x : box_sites(10, 3)) {
    double s = 0;
    for (int i = 0; i < 3; ++i)
      for (int sgn : {-1, 1}) {
        LatticePoint q = x;
        q.c[i] += sgn;
        s += tab.at(q);
      }
    double expect = (norm_inf(x, 3) == 0) ? tab.g0() - 1.0 : tab.at(x);
    max_resid = std::max(max_resid, std::abs(s / 6.0 - expect));
  }
  rep.verdicts.push_back(make_verdict("harmonicity_residual_|x|<=10", max_resid, 0, 0, 0,
                                      "", tol_abs));

  // monotone bound and tail asymptotic
  double tail = tab.at(lp3(50, 0, 0));
  double tail_oracle = 3 * green_continuum_r(50.0, 3);
  rep.verdicts.push_back(make_verdict("tail_vs_dG_at_50", tail / tail_oracle, 1.0, 0, 0,
                                      "rel tol 2%", 0.02));
  rep.diagnostics.push_back(
      make_verdict("g0_positive_gt_1", tab.g0(), 1.516386059151978, 0, 0, "watson", 1e-9));
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// mean-occupation

ExperimentReport exp_mean_occupation(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  const GreenTable& tab = shared_table(cfg, 3);
  int radius = cfg.integer("window_radius", 2);
  size_t n = size_t(cfg.num("n", 1e4));
  std::vector<double> u_list = cfg.list("u_list", {0.5, 1.0});
  int R = cfg.integer("r_escape", 4 * radius);

  int dump_fields = cfg.integer("dump_fields", 0);
  auto window = box_sites(radius, 3);
  InterlacementSampler exact(window, tab, R, WalkMode::Exact);
  // the unbiasedness cross-check needs a truncation radius large enough that
  // the kill bias sits below the statistical resolution
  int R_tr = cfg.integer("r_escape_truncated", 120);
  InterlacementSampler trunc(window, tab, R_tr, WalkMode::Truncated);
  const size_t sites = window.size();
  double m_site = bonferroni_multiplier(int(sites), 3.0);
  cfg.note("per_site_se_multiple", format_double(m_site));

  for (size_t ui = 0; ui < u_list.size(); ++ui) {
    const double u = u_list[ui];
    char ctx[32];
    std::snprintf(ctx, sizeof(ctx), "u=%g", u);
    for (int mode = 0; mode < 2; ++mode) {
      const InterlacementSampler& S = mode == 0 ? exact : trunc;
      const char* mname = mode == 0 ? "exact" : "truncated";
      std::vector<double> sum(sites, 0), sumsq(sites, 0), agg(n, 0);
      std::vector<double> zero_frac(n, 0);
      // per-draw site vectors reduced serially for determinism
      std::vector<std::vector<double>> buf(n);
      parallel_for(n, cfg.workers, [&](size_t i) {
        Rng rng(derive_seed(cfg.seed, 100 + mode + 2 * ui, i));
        OccupationField f;
        S.sample(u, rng, f);
        buf[i] = std::move(f.times);
        zero_frac[i] = f.trajectory_count == 0 ? 1.0 : 0.0;
      });
      for (size_t i = 0; i < n; ++i) {
        double a = 0;
        for (size_t s = 0; s < sites; ++s) {
          double v = buf[i][s];
          sum[s] += v;
          sumsq[s] += v * v;
          a += v;
        }
        agg[i] = a / double(sites);
      }
      // worst site in SE units
      double worst = 0, worst_se = 1;
      for (size_t s = 0; s < sites; ++s) {
        double mean = sum[s] / double(n);
        double var = std::max(sumsq[s] / double(n) - mean * mean, 1e-300);
        double se = std::sqrt(var / double(n));
        if (std::abs(mean - u) / se > worst) {
          worst = std::abs(mean - u) / se;
          worst_se = se;
        }
      }
      Verdict site_v = make_verdict(std::string("per_site_mean_worst_") + mname,
                                    worst * worst_se, 0.0, worst_se, m_site, ctx);
      MomentReport am = compute_moments(agg);
      Verdict win_v = make_verdict(std::string("window_mean_") + mname, am.mean, u,
                                   am.mean_se, 3.0, ctx);
      if (mode == 0) {
        rep.verdicts.push_back(site_v);
        rep.verdicts.push_back(win_v);
        // Poisson-zero exact check: P[count = 0] = exp(-u cap K)
        double p = 0;
        for (double z : zero_frac) p += z;
        p /= double(n);
        double oracle = std::exp(-u * exact.capacity());
        double se = std::sqrt(std::max(oracle * (1 - oracle), 1e-300) / double(n));
        rep.verdicts.push_back(
            make_verdict("empty_cloud_probability", p, oracle, se, 3.0, ctx));
        if (ui == 0 && dump_fields > 0) {
          // sparse per-draw occupation dump: draw, x, y, z, time
          PlotSeries dump;
          dump.name = "fields_dump";
          dump.columns = {"draw", "x", "y", "z", "time"};
          for (int i = 0; i < dump_fields && i < int(n); ++i)
            for (size_t s = 0; s < sites; ++s)
              if (buf[i][s] != 0)
                dump.rows.push_back({double(i), double(window[s].c[0]),
                                     double(window[s].c[1]), double(window[s].c[2]),
                                     buf[i][s]});
          rep.plots.push_back(dump);
        }
      } else {
        // truncated mode carries its documented kill bias
        rep.diagnostics.push_back(site_v);
        rep.diagnostics.push_back(win_v);
      }
    }
    // exact vs truncated window means
    std::vector<double> a1(n), a2(n);
    parallel_for(n, cfg.workers, [&](size_t i) {
      Rng r1(derive_seed(cfg.seed, 300 + ui, i));
      Rng r2(derive_seed(cfg.seed, 400 + ui, i));
      OccupationField f1, f2;
      exact.sample(u, r1, f1);
      trunc.sample(u, r2, f2);
      double s1 = 0, s2 = 0;
      for (size_t s = 0; s < sites; ++s) {
        s1 += f1.times[s];
        s2 += f2.times[s];
      }
      a1[i] = s1 / double(sites);
      a2[i] = s2 / double(sites);
    });
    MomentReport m1 = compute_moments(a1), m2 = compute_moments(a2);
    double se12 = std::sqrt(m1.mean_se * m1.mean_se + m2.mean_se * m2.mean_se);
    double bias_bound = trunc.truncation_bias_bound(u);
    rep.verdicts.push_back(make_verdict("exact_vs_truncated_mean", m1.mean, m2.mean, se12,
                                        3.0, ctx, bias_bound));
    // killing can only lose occupation: the sharp one-sided check
    rep.verdicts.push_back(make_verdict(
        "truncated_below_exact", std::max(m2.mean - m1.mean, 0.0), 0.0, se12, 3.0, ctx));
    rep.diagnostics.push_back(make_verdict("truncation_bias_bound_per_site", bias_bound,
                                           0, 0, 0, ctx, 1e9));
  }
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// lattice-laplace

ExperimentReport exp_lattice_laplace(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  const GreenTable& tab = shared_table(cfg, 3);
  double u = cfg.num("u", 0.5);
  int N = cfg.integer("N", 1);
  size_t n = size_t(cfg.num("n", 1e5));
  double tol_se = cfg.num("tol_se", 4.0);

  TestFunctionSpec V = config_test_function(cfg);
  V.radius = cfg.num("v_radius", 1.99);  // 3^3 lattice support at N = 1
  LatticeFunction Vf = V.restrict_to_lattice(N);
  cfg.note("lattice_support_sites", std::to_string(Vf.size()));

  double norm = green_operator_norm(Vf, N, tab);
  double z_cap = 0.5 / norm;
  cfg.note("operator_norm", format_double(norm));
  std::vector<double> zs = z_grid_from_cap(z_cap, cfg);

  int R = cfg.integer("r_escape", std::max(8, 4 * 2));
  InterlacementSampler sampler(Vf.sites, tab, R, WalkMode::Exact);

  const double cell = 1.0 / (3.0 * N * N);
  std::vector<double> vals = draw_values(n, cfg.seed, 1, cfg.workers, [&](Rng& rng, size_t) {
    OccupationField f;
    sampler.sample(u, rng, f);
    double s = 0;
    for (size_t k = 0; k < Vf.size(); ++k) s += Vf.values[k] * f.times[k] * cell;
    return s;
  });

  MomentReport mr = empirical_mgf(vals, zs);
  std::vector<double> oracle(zs.size());
  for (size_t i = 0; i < zs.size(); ++i) {
    LatticeFunction zV = Vf;
    for (auto& v : zV.values) v *= zs[i];
    LaplaceExponentResult r = lattice_laplace_exponent(zV, N, u, tab);
    if (!r.domain_ok) throw std::domain_error("lattice-laplace: oracle outside domain");
    oracle[i] = std::exp(r.value);
    char label[48];
    std::snprintf(label, sizeof(label), "mgf[z=%.4g]", zs[i]);
    rep.verdicts.push_back(
        make_verdict(label, mr.mgf[i].value, oracle[i], mr.mgf[i].se, tol_se, "resolvent-exponent"));
  }
  // mean identity E[<...>] = u sum V / (d N^2)
  double mean_oracle = 0;
  for (double v : Vf.values) mean_oracle += v;
  mean_oracle *= u * cell;
  rep.verdicts.push_back(
      make_verdict("mean_occupation_functional", mr.mean, mean_oracle, mr.mean_se, 3.0,
                   "mean-identity"));
  rep.plots.push_back(mgf_plot("mgf_curve", mr, oracle));
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// high-intensity-limit (variance exactness + third-cumulant decay)

ExperimentReport exp_high_intensity(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  const GreenTable& tab = shared_table(cfg, 3);
  TestFunctionSpec V = config_test_function(cfg);
  std::string mode = cfg.str("mode", "variance");
  size_t n = size_t(cfg.num("n", 1e5));

  auto run_point = [&](int N, double u, uint64_t stream) {
    LatticeFunction Vf = V.restrict_to_lattice(N);
    int R = cfg.integer("r_escape", 0);
    if (R == 0) {
      int wrad = 0;
      for (const auto& s : Vf.sites) wrad = std::max(wrad, norm_inf(s, 3));
      R = 4 * wrad;
    }
    InterlacementSampler sampler(Vf.sites, tab, R, WalkMode::Exact);
    const double cell = 1.0 / (3.0 * N * N);
    const double a_N = std::sqrt(2.0 / 3.0 * N * u);  // d = 3
    std::vector<double> vals =
        draw_values(n, cfg.seed, stream, cfg.workers, [&](Rng& rng, size_t) {
          OccupationField f;
          sampler.sample(u, rng, f);
          double s = 0;
          for (size_t k = 0; k < Vf.size(); ++k)
            s += Vf.values[k] * (f.times[k] - u) * cell;
          return s / a_N;
        });
    return std::pair<MomentReport, LatticeFunction>(compute_moments(vals), Vf);
  };

  if (mode == "variance") {
    std::vector<double> N_list = cfg.list("N_list", {4, 8});
    double u_exp = cfg.num("u_exponent", 0.5);  // u_N = N^exponent
    uint64_t stream = 10;
    PlotSeries ladder;
    ladder.name = "variance_ladder";
    ladder.columns = {"N", "empirical_variance", "se", "exact"};
    for (double Nd : N_list) {
      int N = int(Nd);
      double u = std::pow(double(N), u_exp);
      auto [mr, Vf] = run_point(N, u, stream++);
      double exact = lattice_v_gnv_power(Vf, N, tab, 1);  // <V, G_N V>_{L_N}
      char ctx[48];
      std::snprintf(ctx, sizeof(ctx), "N=%d,u=%.4g", N, u);
      rep.verdicts.push_back(
          make_verdict("variance_exact_finite_N", mr.variance, exact, mr.variance_se, 3.0,
                       ctx));
      rep.verdicts.push_back(make_verdict("mean_centered", mr.mean, 0.0, mr.mean_se, 3.0, ctx));
      ladder.rows.push_back({double(N), mr.variance, mr.variance_se, exact});
    }
    rep.plots.push_back(ladder);
  } else if (mode == "cumulant") {
    int N = cfg.integer("N", 4);
    std::vector<double> u_list = cfg.list("u_list", {1, 4, 16});
    uint64_t stream = 20;
    struct Point {
      double u, k3, se, exact;
    };
    std::vector<Point> pts;
    PlotSeries ladder;
    ladder.name = "third_cumulant_ladder";
    ladder.columns = {"u", "empirical_k3", "se", "exact"};
    for (double u : u_list) {
      auto [mr, Vf] = run_point(N, u, stream++);
      double a_N = std::sqrt(2.0 / 3.0 * N * u);
      double exact = 3.0 * lattice_v_gnv_power(Vf, N, tab, 2) / a_N;
      char ctx[48];
      std::snprintf(ctx, sizeof(ctx), "N=%d,u=%.4g", N, u);
      rep.verdicts.push_back(make_verdict("third_cumulant_exact", mr.third_cumulant,
                                          exact, mr.third_cumulant_se, 3.0, ctx));
      pts.push_back({u, mr.third_cumulant, mr.third_cumulant_se, exact});
      ladder.rows.push_back({u, mr.third_cumulant, mr.third_cumulant_se, exact});
    }
    // u quadrupled => cumulant halves (1/sqrt(u) scaling)
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      double se = std::sqrt(pts[i + 1].se * pts[i + 1].se + 0.25 * pts[i].se * pts[i].se);
      char ctx[64];
      std::snprintf(ctx, sizeof(ctx), "u=%g->%g", pts[i].u, pts[i + 1].u);
      rep.verdicts.push_back(make_verdict("cumulant_halving", pts[i + 1].k3,
                                          0.5 * pts[i].k3, se, 3.0, ctx));
    }
    rep.plots.push_back(ladder);
  } else {
    throw ConfigError("high-intensity-limit: mode must be variance|cumulant");
  }
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// constant-intensity-limit

ExperimentReport exp_constant_intensity(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  const GreenTable& tab = shared_table(cfg, 3);
  TestFunctionSpec V = config_test_function(cfg);
  double alpha = cfg.num("alpha", 0.5);
  std::vector<double> N_list = cfg.list("N_list", {2, 4, 8});
  size_t n = size_t(cfg.num("n", 2e5));
  double spacing = cfg.num("nystrom_spacing", 1.0 / 12);

  // admissible z across the whole ladder and the continuum
  double worst_norm = 0;
  for (double Nd : N_list) {
    LatticeFunction Vf = V.restrict_to_lattice(int(Nd));
    worst_norm = std::max(worst_norm, green_operator_norm(Vf, int(Nd), tab));
  }
  ContinuumLaplaceResult probe = continuum_laplace_exponent(V, alpha, spacing, false);
  worst_norm = std::max(worst_norm, probe.operator_norm);
  double z_cap = 0.5 / worst_norm;
  cfg.note("z_cap", format_double(z_cap));
  std::vector<double> zs = z_grid_from_cap(z_cap, cfg);

  // continuum oracle per z, with the Richardson allowance
  std::vector<double> oracle(zs.size()), allowance(zs.size());
  for (size_t i = 0; i < zs.size(); ++i) {
    TestFunctionSpec Vz = V;
    Vz.amplitude *= zs[i];
    ContinuumLaplaceResult r = continuum_laplace_exponent(Vz, alpha, spacing, true);
    if (!r.domain_ok)
      throw std::domain_error("constant-intensity-limit: oracle outside domain");
    oracle[i] = std::exp(r.value);
    allowance[i] = oracle[i] * r.refinement_delta;
  }

  std::vector<MomentReport> per_N;
  uint64_t stream = 30;
  for (double Nd : N_list) {
    int N = int(Nd);
    double u_N = 3.0 * alpha / (N);  // d alpha N^{2-d}, d = 3
    LatticeFunction Vf = V.restrict_to_lattice(N);
    int wrad = 0;
    for (const auto& s : Vf.sites) wrad = std::max(wrad, norm_inf(s, 3));
    InterlacementSampler sampler(Vf.sites, tab, 4 * wrad, WalkMode::Exact);
    const double cell = 1.0 / (3.0 * N * N);
    std::vector<double> vals =
        draw_values(n, cfg.seed, stream++, cfg.workers, [&](Rng& rng, size_t) {
          OccupationField f;
          sampler.sample(u_N, rng, f);
          double s = 0;
          for (size_t k = 0; k < Vf.size(); ++k) s += Vf.values[k] * f.times[k] * cell;
          return s;
        });
    per_N.push_back(empirical_mgf(vals, zs));
  }

  // ladder decrease and final-N agreement. Once the lattice-continuum gap
  // falls below the Monte Carlo noise floor, strict monotonicity of the
  // empirical errors is a coin flip; the gate is that no step grows the
  // error beyond the combined noise.
  for (size_t i = 0; i < zs.size(); ++i) {
    char label[48];
    PlotSeries ladder;
    std::snprintf(label, sizeof(label), "ladder_z%zu", i);
    ladder.name = label;
    ladder.columns = {"N", "abs_error", "se", "oracle"};
    double worst_growth = 0, worst_se = 1e-300;
    double prev = 0, prev_se = 0;
    for (size_t k = 0; k < per_N.size(); ++k) {
      double err = std::abs(per_N[k].mgf[i].value - oracle[i]);
      double se = per_N[k].mgf[i].se;
      if (k > 0) {
        double comb = std::sqrt(se * se + prev_se * prev_se);
        if ((err - prev) / comb > worst_growth / worst_se) {
          worst_growth = err - prev;
          worst_se = comb;
        }
      }
      prev = err;
      prev_se = se;
      ladder.rows.push_back({N_list[k], err, se, oracle[i]});
    }
    rep.plots.push_back(ladder);
    char ctx[48];
    std::snprintf(ctx, sizeof(ctx), "z=%.4g", zs[i]);
    rep.verdicts.push_back(make_verdict(std::string("ladder_error_growth_") + ctx,
                                        std::max(worst_growth, 0.0), 0.0, worst_se, 3.0,
                                        ctx));
    const MomentReport& last = per_N.back();
    rep.verdicts.push_back(make_verdict(std::string("final_N_mgf_") + ctx,
                                        last.mgf[i].value, oracle[i], last.mgf[i].se, 4.0,
                                        ctx, allowance[i]));
  }
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// brownian experiments

ExperimentReport exp_brownian_intensity(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  TestFunctionSpec V = config_test_function(cfg);
  double alpha = cfg.num("alpha", 1.0);
  double rho = cfg.num("rho", 1.2 * V.radius);
  size_t n = size_t(cfg.num("n", 4000));
  size_t n_ref = size_t(cfg.num("n_refined", 1500));
  BrownianCloudParams P;
  P.alpha = alpha;
  P.rho = rho;
  P.delta = cfg.num("delta", (rho / 100) * (rho / 100));
  cfg.note("delta_resolved", format_double(P.delta));
  std::vector<TestFunctionSpec> Vs{V};

  auto run = [&](BrownianCloudParams p, size_t count, uint64_t stream) {
    return draw_values(count, cfg.seed, stream, cfg.workers, [&](Rng& rng, size_t) {
      return sample_brownian_cloud(p, Vs, rng).pairings[0];
    });
  };
  std::vector<double> coarse = run(P, n, 40);
  BrownianCloudParams P4 = P;
  P4.delta = P.delta / 4;
  std::vector<double> fine = run(P4, n_ref, 41);

  MomentReport mc = compute_moments(coarse), mf = compute_moments(fine);
  double target = alpha * integral_V(V);
  double shift_se = std::sqrt(mc.mean_se * mc.mean_se + mf.mean_se * mf.mean_se);
  double delta_allow = std::abs(mc.mean - mf.mean);
  rep.verdicts.push_back(
      make_verdict("intensity_mean", mc.mean, target, mc.mean_se, 3.0, "flat-intensity",
                   delta_allow));
  rep.verdicts.push_back(
      make_verdict("delta_refinement_shift", mc.mean, mf.mean, shift_se, 3.0, "delta/4"));
  rep.diagnostics.push_back(make_verdict("variance_vs_2aVGV", mc.variance,
                                         2 * alpha * vGv_continuum(V), mc.variance_se,
                                         4.0, "laplace-quadratic-term"));
  int dump_paths = cfg.integer("dump_paths", 0);
  if (dump_paths > 0) {
    // polyline dump of one cloud: path id, step index, coordinates
    std::vector<BrownianCloudResult::PathPoint> pts;
    Rng rng(derive_seed(cfg.seed, 42, 0));
    sample_brownian_cloud(P, Vs, rng, &pts);
    PlotSeries dump;
    dump.name = "paths_dump";
    dump.columns = {"path", "step", "x", "y", "z"};
    for (const auto& q : pts) {
      if (int(q.path) >= dump_paths) break;
      dump.rows.push_back({double(q.path), double(q.step), q.pos.x, q.pos.y, q.pos.z});
    }
    rep.plots.push_back(dump);
  }
  finalize(rep, cfg);
  return rep;
}

ExperimentReport exp_vacant_set(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  double alpha = cfg.num("alpha", 0.5);
  double radius = cfg.num("probe_radius", 1.0);
  double r = cfg.num("thickening", 0.0);
  size_t n = size_t(cfg.num("n", 2e5));
  double p = vacant_probe(alpha, radius, r, n, cfg.seed);
  double cap = capacity_ball_continuum(radius + r, 3);
  double oracle = std::exp(-alpha * cap);
  double se = std::sqrt(oracle * (1 - oracle) / double(n));
  rep.verdicts.push_back(make_verdict("vacant_probability", p, oracle, se, 3.0, "poisson-capacity-law"));
  // doubling alpha squares the probability
  double p2 = vacant_probe(2 * alpha, radius, r, n, cfg.seed + 1);
  double se2 = std::sqrt(oracle * oracle * (1 - oracle * oracle) / double(n));
  rep.diagnostics.push_back(
      make_verdict("vacant_probability_doubled_alpha", p2, oracle * oracle, se2, 3.0,
                   "exponential form"));
  finalize(rep, cfg);
  return rep;
}

ExperimentReport exp_brownian_laplace(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  TestFunctionSpec V = config_test_function(cfg);
  double alpha = cfg.num("alpha", 0.5);
  double rho = cfg.num("rho", 1.2 * V.radius);
  size_t n = size_t(cfg.num("n", 2e4));
  double spacing = cfg.num("nystrom_spacing", 1.0 / 12);

  ContinuumLaplaceResult probe = continuum_laplace_exponent(V, alpha, spacing, false);
  double z_cap = 0.5 / probe.operator_norm;
  cfg.note("z_cap", format_double(z_cap));
  std::vector<double> zs = z_grid_from_cap(z_cap, cfg);

  BrownianCloudParams P;
  P.alpha = alpha;
  P.rho = rho;
  P.delta = cfg.num("delta", (rho / 100) * (rho / 100));
  std::vector<TestFunctionSpec> Vs{V};
  std::vector<double> vals = draw_values(n, cfg.seed, 50, cfg.workers, [&](Rng& rng, size_t) {
    return sample_brownian_cloud(P, Vs, rng).pairings[0];
  });
  MomentReport mr = empirical_mgf(vals, zs);
  std::vector<double> oracle(zs.size());
  for (size_t i = 0; i < zs.size(); ++i) {
    TestFunctionSpec Vz = V;
    Vz.amplitude *= zs[i];
    ContinuumLaplaceResult r = continuum_laplace_exponent(Vz, alpha, spacing, true);
    oracle[i] = std::exp(r.value);
    char label[48];
    std::snprintf(label, sizeof(label), "mgf[z=%.4g]", zs[i]);
    rep.verdicts.push_back(make_verdict(label, mr.mgf[i].value, oracle[i], mr.mgf[i].se,
                                        4.0, "laplace-transform",
                                        oracle[i] * r.refinement_delta + 2 * P.delta));
  }
  rep.plots.push_back(mgf_plot("mgf_curve", mr, oracle));
  finalize(rep, cfg);
  return rep;
}

ExperimentReport exp_scaling_invariance(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  TestFunctionSpec V = config_test_function(cfg);
  double alpha = cfg.num("alpha", 0.5);
  double lambda = cfg.num("lambda", 2.0);
  size_t n = size_t(cfg.num("n", 2e4));
  double rho = cfg.num("rho", 1.2 * V.radius);

  // side A: <L_alpha, V>; side B: lambda^2 <L_{lambda alpha}, V(lambda .)>
  // (d = 3; the mean identity E = alpha int V pins this convention)
  BrownianCloudParams PA;
  PA.alpha = alpha;
  PA.rho = rho;
  PA.delta = cfg.num("delta", (rho / 100) * (rho / 100));
  TestFunctionSpec VB = V;
  VB.radius = V.radius / lambda;
  for (auto& c : VB.center) c /= lambda;
  BrownianCloudParams PB;
  PB.alpha = alpha * lambda;  // lambda^{d-2} alpha
  PB.rho = rho / lambda;
  PB.delta = PA.delta / (lambda * lambda);
  double jac = lambda * lambda;

  std::vector<TestFunctionSpec> VsA{V}, VsB{VB};
  std::vector<double> a = draw_values(n, cfg.seed, 60, cfg.workers, [&](Rng& rng, size_t) {
    return sample_brownian_cloud(PA, VsA, rng).pairings[0];
  });
  std::vector<double> b = draw_values(n, cfg.seed, 61, cfg.workers, [&](Rng& rng, size_t) {
    return jac * sample_brownian_cloud(PB, VsB, rng).pairings[0];
  });
  MomentReport ma = compute_moments(a), mb = compute_moments(b);
  double target = alpha * integral_V(V);
  double var_target = 2 * alpha * vGv_continuum(V);
  rep.verdicts.push_back(make_verdict("mean_side_A", ma.mean, target, ma.mean_se, 3.0, ""));
  rep.verdicts.push_back(make_verdict("mean_side_B", mb.mean, target, mb.mean_se, 3.0, ""));
  rep.verdicts.push_back(make_verdict(
      "variance_A_vs_B", ma.variance, mb.variance,
      std::sqrt(ma.variance_se * ma.variance_se + mb.variance_se * mb.variance_se), 3.0, ""));
  rep.verdicts.push_back(make_verdict("variance_A_vs_2aVGV", ma.variance, var_target,
                                      ma.variance_se, 3.0, ""));
  rep.verdicts.push_back(make_verdict("variance_B_vs_2aVGV", mb.variance, var_target,
                                      mb.variance_se, 3.0, ""));
  cfg.note("pushforward_convention",
           "side B = lambda^2 <L_{lambda^{d-2} alpha}, V o h_lambda>, no extra Jacobian");
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// isomorphism-discrete: 1/2 phi^2 + L matches the shifted square in law

ExperimentReport exp_isomorphism_discrete(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  const GreenTable& tab = shared_table(cfg, 3);
  double u = cfg.num("u", 0.5);
  int N = cfg.integer("N", 4);
  int radius = cfg.integer("window_radius", 3);
  size_t n = size_t(cfg.num("n", 1e5));
  TestFunctionSpec V = config_test_function(cfg);

  auto window = box_sites(radius, 3);
  require_support_covered(window, V, N, 3);
  DiscreteGffSampler gff(window, tab);
  InterlacementSampler occ(window, tab, cfg.integer("r_escape", 4 * radius),
                           WalkMode::Exact);
  const double g0 = tab.g0();
  const double shift = std::sqrt(2 * u);
  std::vector<double> vvals(window.size());
  {
    double y[3];
    for (size_t i = 0; i < window.size(); ++i) {
      for (int k = 0; k < 3; ++k) y[k] = double(window[i].c[k]) / N;
      vvals[i] = V(y);
    }
  }

  // A = sum V (1/2 :phi^2: + L); B = 1/2 sum V :(phi + sqrt(2u))^2:
  std::vector<double> a = draw_values(n, cfg.seed, 70, cfg.workers, [&](Rng& rng, size_t) {
    thread_local std::vector<double> phi;
    gff.sample(rng, phi);
    OccupationField f;
    occ.sample(u, rng, f);
    double s = 0;
    for (size_t k = 0; k < vvals.size(); ++k)
      s += vvals[k] * (0.5 * (phi[k] * phi[k] - g0) + f.times[k]);
    return s;
  });
  std::vector<double> b = draw_values(n, cfg.seed, 71, cfg.workers, [&](Rng& rng, size_t) {
    thread_local std::vector<double> phi;
    gff.sample(rng, phi);
    double s = 0;
    for (size_t k = 0; k < vvals.size(); ++k) {
      double w = phi[k] + shift;
      s += vvals[k] * 0.5 * (w * w - g0);
    }
    return s;
  });

  // admissible z from the quadratic-functional spectrum and the Laplace domain
  double z_cap;
  {
    const int m = int(window.size());
    Eigen::MatrixXd A(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        A(i, j) = std::sqrt(std::abs(vvals[i])) * tab.at(sub(window[i], window[j], 3)) *
                  std::sqrt(std::abs(vvals[j]));
    double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues().maxCoeff();
    double zq = 0.9 / lmax;  // MGF of the quadratic part finite below 1/lmax
    LatticeFunction Vf = V.restrict_to_lattice(N);
    for (auto& v : Vf.values) v *= 3.0 * N * N;  // functional uses V itself, not V/(dN^2)
    double zl = 0.5 / green_operator_norm(Vf, N, tab);
    z_cap = 0.5 * std::min(zq, zl);
  }
  cfg.note("z_cap", format_double(z_cap));
  std::vector<double> zs = z_grid_from_cap(z_cap, cfg);
  push_all(rep.verdicts,
           two_sample_identity_test(a, b, zs, cfg.num("tol_se", 4.0), "occupation-field-shift-identity"));
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// wick-identities

ExperimentReport exp_wick_identities(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  const GreenTable& tab = shared_table(cfg, 3);
  size_t n = size_t(cfg.num("n", 1e5));

  // lattice Wick-square covariance: E[:phi_0^2: :phi_z^2:] = 2 g(z)^2, |z| <= 3
  {
    int radius = cfg.integer("window_radius", 3);
    auto window = box_sites(radius, 3);
    DiscreteGffSampler gff(window, tab);
    // one representative per hyperoctahedral orbit with |z| <= 3
    std::vector<LatticePoint> offsets;
    {
      std::set<std::array<int, kMaxDim>> seen;
      for (const auto& p : box_sites(3, 3)) {
        if (norm2(p, 3) > 3.0 + 1e-12) continue;
        auto c = octant_canonical(p, 3);
        if (seen.insert(c).second) {
          LatticePoint q;
          for (int k = 0; k < 3; ++k) q.c[k] = c[k];
          offsets.push_back(q);
        }
      }
    }
    size_t zero_idx = 0;
    std::vector<size_t> off_idx(offsets.size());
    {
      auto find_site = [&](const LatticePoint& p) -> size_t {
        for (size_t i = 0; i < window.size(); ++i)
          if (window[i] == p) return i;
        throw std::logic_error("offset outside window");
      };
      zero_idx = find_site(lp3(0, 0, 0));
      for (size_t k = 0; k < offsets.size(); ++k) off_idx[k] = find_site(offsets[k]);
    }
    const double g0 = tab.g0();
    std::vector<std::vector<double>> prods(offsets.size(), std::vector<double>(n));
    parallel_for(n, cfg.workers, [&](size_t i) {
      Rng rng(derive_seed(cfg.seed, 80, i));
      thread_local std::vector<double> phi;
      gff.sample(rng, phi);
      double w0 = phi[zero_idx] * phi[zero_idx] - g0;
      for (size_t k = 0; k < offsets.size(); ++k) {
        double wz = phi[off_idx[k]] * phi[off_idx[k]] - g0;
        prods[k][i] = w0 * wz;
      }
    });
    double m_fam = bonferroni_multiplier(int(offsets.size()), 3.0);
    for (size_t k = 0; k < offsets.size(); ++k) {
      MomentReport mr = compute_moments(prods[k]);
      double g = tab.at(offsets[k]);
      char label[64];
      std::snprintf(label, sizeof(label), "wick_cov_lattice[(%d,%d,%d)]", offsets[k].c[0],
                    offsets[k].c[1], offsets[k].c[2]);
      rep.verdicts.push_back(
          make_verdict(label, mr.mean, 2 * g * g, mr.mean_se, m_fam, "wick-square-covariance"));
    }
  }

  // Wick product of two separated bump functionals of the mollified field
  {
    double eps = cfg.num("eps", 0.1);
    double spacing = cfg.num("grid_spacing", 0.1);
    Mollifier moll(eps);
    TestFunctionSpec f, h;
    f.amplitude = h.amplitude = 1.0;
    f.radius = h.radius = 0.25;
    f.center = {-0.4, 0, 0};
    h.center = {0.4, 0, 0};
    // grid covering both supports
    std::vector<Vec3> grid;
    std::vector<double> fv, hv;
    int m = int(std::ceil(0.7 / spacing));
    for (int i = -m; i <= m; ++i)
      for (int j = -m; j <= m; ++j)
        for (int k = -m; k <= m; ++k) {
          Vec3 y{i * spacing, j * spacing, k * spacing};
          double a = f.eval3(y), b = h.eval3(y);
          if (a != 0 || b != 0) {
            grid.push_back(y);
            fv.push_back(a);
            hv.push_back(b);
          }
        }
    MollifiedGffSampler gff(grid, moll);
    const double cell = spacing * spacing * spacing;
    // E[YZ] on the grid (exact for the sampled field) and the continuum target
    double eyz_grid = 0;
    for (size_t i = 0; i < grid.size(); ++i)
      for (size_t j = 0; j < grid.size(); ++j)
        eyz_grid += fv[i] * moll.green((grid[i] - grid[j]).norm()) * hv[j] * cell * cell;
    double eyz_cont = fGh_continuum(f, h);
    double allowance = 2 * std::abs(eyz_grid * eyz_grid - eyz_cont * eyz_cont);
    // exact grid variances for the Wick squares
    double eyy = 0, ezz = 0;
    for (size_t i = 0; i < grid.size(); ++i)
      for (size_t j = 0; j < grid.size(); ++j) {
        double gij = moll.green((grid[i] - grid[j]).norm()) * cell * cell;
        eyy += fv[i] * gij * fv[j];
        ezz += hv[i] * gij * hv[j];
      }
    std::vector<double> wickprod =
        draw_values(n / 2, cfg.seed, 82, cfg.workers, [&](Rng& rng, size_t) {
          thread_local std::vector<double> phi;
          gff.sample(rng, phi);
          double Y = 0, Z = 0;
          for (size_t i = 0; i < grid.size(); ++i) {
            Y += fv[i] * phi[i] * cell;
            Z += hv[i] * phi[i] * cell;
          }
          return (Y * Y - eyy) * (Z * Z - ezz);
        });
    MomentReport mr = compute_moments(wickprod);
    rep.verdicts.push_back(make_verdict("wick_product_continuum", mr.mean,
                                        2 * eyz_cont * eyz_cont, mr.mean_se, 3.0,
                                        "wick-product-identity", allowance));
    // grade orthogonality: cov(Y, :Z^2:) = 0
    std::vector<double> grade = draw_values(n / 2, cfg.seed, 83, cfg.workers,
                                            [&](Rng& rng, size_t) {
      thread_local std::vector<double> phi;
      gff.sample(rng, phi);
      double Y = 0, Z = 0;
      for (size_t i = 0; i < grid.size(); ++i) {
        Y += fv[i] * phi[i] * cell;
        Z += hv[i] * phi[i] * cell;
      }
      return Y * (Z * Z - ezz);
    });
    MomentReport mg = compute_moments(grade);
    rep.verdicts.push_back(
        make_verdict("wick_grade_orthogonality", mg.mean, 0.0, mg.mean_se, 3.0, ""));
  }
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// det2-mgf

ExperimentReport exp_det2_mgf(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  int N = cfg.integer("N", 8);
  double eps = cfg.num("eps", 0.25);
  double alpha = cfg.num("alpha", 0.5);
  size_t n = size_t(cfg.num("n", 1e5));
  TestFunctionSpec V = config_test_function(cfg);
  V.radius = cfg.num("v_radius", 0.45);

  // grid = L_N points in [-1/2, 1/2)^3, 8^3 sites at N = 8
  std::vector<Vec3> grid;
  std::vector<double> vvals;
  for (int i = -N / 2; i < N / 2; ++i)
    for (int j = -N / 2; j < N / 2; ++j)
      for (int k = -N / 2; k < N / 2; ++k) {
        Vec3 y{double(i) / N, double(j) / N, double(k) / N};
        grid.push_back(y);
        vvals.push_back(V.eval3(y));
      }
  Mollifier moll(eps);
  KernelFn kern = mollified_kernel(moll);
  Det2MgfResult probe = det2_mgf_oracle(grid, vvals, N, kern, 0.0, alpha);
  // small-z regime: e^{zS} keeps a manageable tail, so the MGF estimator's
  // SE stays trustworthy at these sample sizes
  double z_cap = probe.z_max * cfg.num("z_safety", 0.55);
  cfg.note("z_cap", format_double(z_cap));
  std::vector<double> zs = z_grid_from_cap(z_cap, cfg);

  MollifiedGffSampler gff(grid, moll);
  const double shift = std::sqrt(2 * alpha);
  const double varc = moll.green0();
  const double cell = 1.0 / (double(N) * N * N);
  std::vector<double> vals = draw_values(n, cfg.seed, 90, cfg.workers, [&](Rng& rng, size_t) {
    thread_local std::vector<double> phi;
    gff.sample(rng, phi);
    double s = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
      double w = phi[i] + shift;
      s += vvals[i] * (w * w - varc);  // :(Phi + sqrt(2a))^2: keeps the G_eps(0) counter term
    }
    return 0.5 * cell * s;
  });

  MomentReport mr = empirical_mgf(vals, zs);
  std::vector<double> oracle(zs.size());
  for (size_t i = 0; i < zs.size(); ++i) {
    Det2MgfResult r = det2_mgf_oracle(grid, vvals, N, kern, zs[i], alpha);
    oracle[i] = r.value;
    char label[48];
    std::snprintf(label, sizeof(label), "mgf[z=%.4g]", zs[i]);
    rep.verdicts.push_back(
        make_verdict(label, mr.mgf[i].value, oracle[i], mr.mgf[i].se, 4.0, "det2-oracle"));
  }
  rep.verdicts.push_back(make_verdict("mgf_z0_exact", 1.0, 1.0, 0, 0, "det2(I)=1"));
  rep.plots.push_back(mgf_plot("mgf_curve", mr, oracle));
  int dump_samples = cfg.integer("dump_samples", 0);
  if (dump_samples > 0) {
    // raw field-vector dump, regenerated from the per-sample streams
    PlotSeries dump;
    dump.name = "samples_dump";
    dump.columns = {"sample", "index", "value"};
    std::vector<double> phi;
    for (int i = 0; i < dump_samples; ++i) {
      Rng rng(derive_seed(cfg.seed, 90, size_t(i)));
      gff.sample(rng, phi);
      for (size_t k = 0; k < phi.size(); ++k)
        dump.rows.push_back({double(i), double(k), phi[k]});
    }
    rep.plots.push_back(dump);
  }
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// variance-asymptotics: squared-Green lattice sums against their limits

ExperimentReport exp_variance_asymptotics(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  const GreenTable& tab3 = shared_table(cfg, 3);
  TestFunctionSpec V = config_test_function(cfg);
  std::vector<double> N_list = cfg.list("N_list", {4, 8, 16, 32});

  double target3 = 18.0 * vG2v_continuum(V);
  PlotSeries ladder;
  ladder.name = "bn_ladder_d3";
  ladder.columns = {"N", "value", "abs_error", "target"};
  double prev_err = 0;
  bool monotone = true;
  for (size_t i = 0; i < N_list.size(); ++i) {
    int N = int(N_list[i]);
    double v = variance_b_n_sum(V, N, tab3);  // equals the rescaled (18/N^6) double sum
    double err = std::abs(v - target3);
    if (i > 0 && err > prev_err) monotone = false;
    prev_err = err;
    ladder.rows.push_back({double(N), v, err, target3});
  }
  rep.plots.push_back(ladder);
  rep.verdicts.push_back(make_verdict("d3_error_monotone_decreasing", monotone ? 1 : 0, 1,
                                      0, 0, "squared-green-integral", 0.5));
  rep.verdicts.push_back(make_verdict("d3_final_value", ladder.rows.back()[1], target3, 0,
                                      0, "N=32",
                                      cfg.num("d3_final_rel_tol", 0.05) * target3));

  // d = 5 at N = 16 against (2 sum g^2) int V^2
  {
    const GreenTable& tab5 = shared_table(cfg, 5);
    TestFunctionSpec V5;
    V5.kind = TestFunctionSpec::Kind::SeparableBump;
    V5.dim = 5;
    V5.amplitude = 0.1;
    V5.radius = 1.0;
    int N5 = cfg.integer("N_d5", 16);
    double v5 = variance_b_n_sum(V5, N5, tab5);
    double tail = 0;
    double gsq = lattice_green_squared_sum(tab5, &tail);
    double target5 = 2.0 * gsq * integral_V2(V5);
    rep.verdicts.push_back(make_verdict("d5_vs_gsq_sum", v5, target5, 0, 0, "squared-green-sum",
                                        0.05 * target5));
    rep.diagnostics.push_back(
        make_verdict("d5_gsq_tail_bound", tail, 0, 0, 0, "integral comparison", 1e9));
  }

  // d = 4 stability diagnostic (constant unnamed in the source material)
  {
    const GreenTable& tab4 = shared_table(cfg, 4);
    TestFunctionSpec V4;
    V4.kind = TestFunctionSpec::Kind::SeparableBump;
    V4.dim = 4;
    V4.amplitude = 0.1;
    V4.radius = 1.0;
    double r8 = variance_b_n_sum(V4, 8, tab4);
    double r16 = variance_b_n_sum(V4, 16, tab4);
    rep.diagnostics.push_back(make_verdict("d4_ratio_stability", r16 / r8, 1.0, 0, 0,
                                           "log-normalized-sum", 0.25));
  }
  finalize(rep, cfg);
  return rep;
}

// ---------------------------------------------------------------------------
// isomorphism-continuum-d3

ExperimentReport exp_isomorphism_continuum(const ExperimentConfig& cfg) {
  ExperimentReport rep = base_report(cfg);
  TestFunctionSpec V = config_test_function(cfg);
  double alpha = cfg.num("alpha", 0.5);
  double eps = cfg.num("eps", 0.1);
  double spacing = cfg.num("grid_spacing", 0.125);
  size_t n_field = size_t(cfg.num("n_field", 25000));
  size_t n_cloud = size_t(cfg.num("n_cloud", 20000));

  Mollifier moll(eps);
  std::vector<Vec3> grid;
  std::vector<double> vvals;
  int m = int(std::ceil((V.radius + spacing) / spacing));
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int k = -m; k <= m; ++k) {
        Vec3 y{i * spacing, j * spacing, k * spacing};
        double v = V.eval3(y);
        if (v != 0) {
          grid.push_back(y);
          vvals.push_back(v);
        }
      }
  MollifiedGffSampler gff(grid, moll);
  const double cell = spacing * spacing * spacing;
  const double varc = moll.green0();
  const double shift = std::sqrt(2 * alpha);

  double int_v = integral_V(V);
  double riemann_v = 0;
  for (double v : vvals) riemann_v += v * cell;
  double riemann_allow = alpha * std::abs(riemann_v - int_v);
  double vgv = vGv_continuum(V);
  double vgev_grid = 0;
  for (size_t i = 0; i < grid.size(); ++i)
    for (size_t j = 0; j < grid.size(); ++j)
      vgev_grid += vvals[i] * moll.green((grid[i] - grid[j]).norm()) * vvals[j];
  vgev_grid *= cell * cell;
  double var_grid_allow = 2 * alpha * std::abs(vgev_grid - vgv);
  cfg.note("vGv_continuum", format_double(vgv));
  cfg.note("vGepsv_grid", format_double(vgev_grid));

  // side A without L: 1/2 <:Phi^2:, V>_h ; side B: 1/2 <:(Phi+shift)^2:, V>_h
  std::vector<double> a_wick =
      draw_values(n_field, cfg.seed, 95, cfg.workers, [&](Rng& rng, size_t) {
        thread_local std::vector<double> phi;
        gff.sample(rng, phi);
        double s = 0;
        for (size_t i = 0; i < grid.size(); ++i)
          s += vvals[i] * (phi[i] * phi[i] - varc);
        return 0.5 * s * cell;
      });
  std::vector<double> b_side =
      draw_values(n_field, cfg.seed, 96, cfg.workers, [&](Rng& rng, size_t) {
        thread_local std::vector<double> phi;
        gff.sample(rng, phi);
        double s = 0;
        for (size_t i = 0; i < grid.size(); ++i) {
          double w = phi[i] + shift;
          s += vvals[i] * (w * w - varc);
        }
        return 0.5 * s * cell;
      });

  BrownianCloudParams P;
  P.alpha = alpha;
  P.rho = cfg.num("rho", 1.2 * V.radius);
  P.delta = cfg.num("delta", (P.rho / 100) * (P.rho / 100));
  std::vector<TestFunctionSpec> Vs{V};
  std::vector<double> cloud =
      draw_values(n_cloud, cfg.seed, 97, cfg.workers, [&](Rng& rng, size_t) {
        return sample_brownian_cloud(P, Vs, rng).pairings[0];
      });

  MomentReport ma = compute_moments(a_wick), mb = compute_moments(b_side),
               mc = compute_moments(cloud);
  // full side A = a_wick + cloud (independent): combine samplewise
  std::vector<double> a_full(std::min(a_wick.size(), cloud.size()));
  for (size_t i = 0; i < a_full.size(); ++i) a_full[i] = a_wick[i] + cloud[i];
  MomentReport maf = compute_moments(a_full);

  double target_mean = alpha * int_v;
  rep.verdicts.push_back(make_verdict("mean_LHS", maf.mean, target_mean, maf.mean_se, 3.0,
                                      "continuum-shift-identity", riemann_allow + 0.02 * P.delta));
  rep.verdicts.push_back(make_verdict("mean_RHS", mb.mean, target_mean, mb.mean_se, 3.0,
                                      "continuum-shift-identity", riemann_allow));
  double var_id = mb.variance - ma.variance;
  double var_id_se = std::sqrt(mb.variance_se * mb.variance_se +
                               ma.variance_se * ma.variance_se);
  rep.verdicts.push_back(make_verdict("variance_identity_RHS_minus_wick", var_id,
                                      2 * alpha * vgv, var_id_se, 4.0, "continuum-shift-identity",
                                      var_grid_allow));
  rep.verdicts.push_back(make_verdict("variance_cloud", mc.variance, 2 * alpha * vgv,
                                      mc.variance_se, 4.0, "laplace-transform"));
  rep.diagnostics.push_back(make_verdict(
      "variance_LHS_vs_RHS", maf.variance, mb.variance,
      std::sqrt(maf.variance_se * maf.variance_se + mb.variance_se * mb.variance_se), 4.0,
      "full two-sided"));
  finalize(rep, cfg);
  return rep;
}

}  // namespace

const std::map<std::string, ExperimentFn>& experiment_registry() {
  static const std::map<std::string, ExperimentFn> reg = {
      {"green-sanity", exp_green_sanity},
      {"mean-occupation", exp_mean_occupation},
      {"lattice-laplace", exp_lattice_laplace},
      {"high-intensity-limit", exp_high_intensity},
      {"constant-intensity-limit", exp_constant_intensity},
      {"brownian-intensity", exp_brownian_intensity},
      {"vacant-set-capacity", exp_vacant_set},
      {"brownian-laplace", exp_brownian_laplace},
      {"scaling-invariance", exp_scaling_invariance},
      {"isomorphism-discrete", exp_isomorphism_discrete},
      {"wick-identities", exp_wick_identities},
      {"det2-mgf", exp_det2_mgf},
      {"variance-asymptotics", exp_variance_asymptotics},
      {"isomorphism-continuum-d3", exp_isomorphism_continuum},
  };
  return reg;
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : experiment_registry()) out.push_back(k);
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  auto it = experiment_registry().find(cfg.experiment);
  if (it == experiment_registry().end())
    throw ConfigError("unknown experiment id: " + cfg.experiment);
  ExperimentReport rep = it->second(cfg);
  auto unread = cfg.unread_keys();
  if (!unread.empty()) {
    std::string msg = "config keys not recognized by this experiment:";
    for (const auto& k : unread) msg += " " + k;
    throw ConfigError(msg);
  }
  return rep;
}

}  // namespace intlace
