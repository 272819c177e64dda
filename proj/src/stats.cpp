#include "intlace/stats.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "intlace/rng.hpp"

namespace intlace {

double compensated_sum(std::span<const double> xs) {
  double s = 0, c = 0;
  for (double x : xs) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

namespace {

struct PowerSums {
  double n = 0;
  double p[7] = {};  // p[k] = sum x^k of centered values, k = 1..6
};

// k-statistics from centered power sums (shift-invariant for k2, k3)
void kstats(const PowerSums& S, double& k2, double& k3) {
  double n = S.n;
  double m1 = S.p[1] / n;
  double m2 = S.p[2] / n - m1 * m1;
  double m3 = S.p[3] / n - 3 * m1 * S.p[2] / n + 2 * m1 * m1 * m1;
  k2 = n / (n - 1) * m2;
  k3 = n * n / ((n - 1) * (n - 2)) * m3;
}

}  // namespace

MomentReport compute_moments(std::span<const double> samples) {
  const size_t n = samples.size();
  if (n < 4) throw std::invalid_argument("compute_moments: need at least 4 samples");
  MomentReport rep;
  rep.n = n;
  rep.mean = compensated_sum(samples) / double(n);

  // centered power sums, compensated on the heavy ones
  PowerSums S;
  S.n = double(n);
  {
    double c1 = 0, c2 = 0, c3 = 0;
    double s1 = 0, s2 = 0, s3 = 0;
    double s4 = 0, s5 = 0, s6 = 0;
    for (double raw : samples) {
      double x = raw - rep.mean;
      double x2 = x * x, x3 = x2 * x;
      auto acc = [](double& s, double& c, double v) {
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
          c += (s - t) + v;
        else
          c += (v - t) + s;
        s = t;
      };
      acc(s1, c1, x);
      acc(s2, c2, x2);
      acc(s3, c3, x3);
      s4 += x2 * x2;
      s5 += x2 * x3;
      s6 += x3 * x3;
    }
    S.p[1] = s1 + c1;
    S.p[2] = s2 + c2;
    S.p[3] = s3 + c3;
    S.p[4] = s4;
    S.p[5] = s5;
    S.p[6] = s6;
  }

  kstats(S, rep.variance, rep.third_cumulant);
  rep.mean_se = std::sqrt(std::max(rep.variance, 0.0) / double(n));

  // jackknife over leave-one-out k-statistics, O(n)
  double sum_k2 = 0, sum_k3 = 0, sum_k2sq = 0, sum_k3sq = 0;
  for (double raw : samples) {
    double x = raw - rep.mean;
    PowerSums L;
    L.n = double(n - 1);
    double xp = x;
    for (int k = 1; k <= 6; ++k) {
      L.p[k] = S.p[k] - xp;
      xp *= x;
    }
    double k2, k3;
    kstats(L, k2, k3);
    sum_k2 += k2;
    sum_k3 += k3;
    sum_k2sq += k2 * k2;
    sum_k3sq += k3 * k3;
  }
  double inv = 1.0 / double(n);
  double var_k2 = (sum_k2sq - sum_k2 * sum_k2 * inv) * (double(n - 1) * inv);
  double var_k3 = (sum_k3sq - sum_k3 * sum_k3 * inv) * (double(n - 1) * inv);
  rep.variance_se = std::sqrt(std::max(var_k2, 0.0));
  rep.third_cumulant_se = std::sqrt(std::max(var_k3, 0.0));
  return rep;
}

MomentReport empirical_mgf(std::span<const double> samples,
                           std::span<const double> z_grid) {
  MomentReport rep = compute_moments(samples);
  double amax = 0;
  for (double x : samples) amax = std::max(amax, std::abs(x));
  for (double z : z_grid) {
    if (std::abs(z) * amax > 690.0) {
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "empirical_mgf: z=%g overflows; admissible |z| <= %g", z,
                    690.0 / amax);
      throw std::domain_error(buf);
    }
    MgfPoint pt;
    pt.z = z;
    if (z == 0) {
      pt.value = 1.0;
      pt.se = 0.0;
    } else {
      const size_t n = samples.size();
      double s = 0, c = 0;
      double s2 = 0;
      for (double x : samples) {
        double e = std::exp(z * x);
        double t = s + e;
        if (std::abs(s) >= e)
          c += (s - t) + e;
        else
          c += (e - t) + s;
        s = t;
        s2 += e * e;
      }
      double mean = (s + c) / double(n);
      double var = std::max(s2 / double(n) - mean * mean, 0.0);
      pt.value = mean;
      pt.se = std::sqrt(var / double(n));
    }
    rep.mgf.push_back(pt);
  }
  return rep;
}

Verdict make_verdict(const std::string& statistic, double value, double oracle,
                     double se, double tol_se, const std::string& context,
                     double allowance) {
  Verdict v;
  v.statistic = statistic;
  v.value = value;
  v.oracle = oracle;
  v.se = se;
  v.tol_se = tol_se;
  v.allowance = allowance;
  v.context = context;
  v.pass = std::abs(value - oracle) <= tol_se * se + allowance;
  return v;
}

double bonferroni_multiplier(int family_size, double base_multiplier) {
  if (family_size <= 1) return base_multiplier;
  // solve erfc(m / sqrt 2) = erfc(base / sqrt 2) / family_size by bisection
  double target = std::erfc(base_multiplier / std::numbers::sqrt2) / family_size;
  double lo = base_multiplier, hi = base_multiplier + 10;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::numbers::sqrt2) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<Verdict> two_sample_identity_test(std::span<const double> a,
                                              std::span<const double> b,
                                              std::span<const double> z_grid,
                                              double tol_se, const std::string& context) {
  MomentReport ra = empirical_mgf(a, z_grid);
  MomentReport rb = empirical_mgf(b, z_grid);
  auto comb = [](double s1, double s2) { return std::sqrt(s1 * s1 + s2 * s2); };
  std::vector<Verdict> out;
  out.push_back(make_verdict("mean", ra.mean, rb.mean, comb(ra.mean_se, rb.mean_se),
                             tol_se, context));
  out.push_back(make_verdict("variance", ra.variance, rb.variance,
                             comb(ra.variance_se, rb.variance_se), tol_se, context));
  out.push_back(make_verdict("third_cumulant", ra.third_cumulant, rb.third_cumulant,
                             comb(ra.third_cumulant_se, rb.third_cumulant_se), tol_se,
                             context));
  for (size_t i = 0; i < ra.mgf.size(); ++i) {
    char label[64];
    std::snprintf(label, sizeof(label), "mgf[z=%g]", ra.mgf[i].z);
    out.push_back(make_verdict(label, ra.mgf[i].value, rb.mgf[i].value,
                               comb(ra.mgf[i].se, rb.mgf[i].se), tol_se, context));
  }
  return out;
}

std::vector<Verdict> gaussian_limit_test(std::span<const double> samples,
                                         double target_variance, double exact_k3,
                                         std::span<const double> z_grid,
                                         const std::string& context) {
  MomentReport r = empirical_mgf(samples, z_grid);
  std::vector<Verdict> out;
  out.push_back(make_verdict("mean", r.mean, 0.0, r.mean_se, 3.0, context));
  out.push_back(
      make_verdict("variance", r.variance, target_variance, r.variance_se, 3.0, context));
  out.push_back(make_verdict("third_cumulant", r.third_cumulant, exact_k3,
                             r.third_cumulant_se, 3.0, context));
  for (const auto& pt : r.mgf) {
    char label[64];
    std::snprintf(label, sizeof(label), "mgf[z=%g]", pt.z);
    double oracle = std::exp(0.5 * pt.z * pt.z * target_variance);
    out.push_back(make_verdict(label, pt.value, oracle, pt.se, 4.0, context));
  }
  return out;
}

double bootstrap_se(std::span<const double> samples, StatKind stat, int resamples,
                    uint64_t seed) {
  const size_t n = samples.size();
  std::vector<double> resample(n), stats(resamples);
  for (int b = 0; b < resamples; ++b) {
    Rng rng(derive_seed(seed, 0xb007, b));
    for (size_t i = 0; i < n; ++i) resample[i] = samples[rng.bounded(n)];
    MomentReport r = compute_moments(resample);
    stats[b] = stat == StatKind::Mean       ? r.mean
               : stat == StatKind::Variance ? r.variance
                                            : r.third_cumulant;
  }
  double m = compensated_sum(stats) / resamples;
  double v = 0;
  for (double s : stats) v += (s - m) * (s - m);
  return std::sqrt(v / (resamples - 1));
}

}  // namespace intlace
