#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace intlace {

struct MgfPoint {
  double z = 0;
  double value = 1;
  double se = 0;
};

// Sample moments with jackknife standard errors, plus an optional empirical
// MGF grid. mean/variance/third cumulant are the unbiased k-statistics.
struct MomentReport {
  size_t n = 0;
  double mean = 0, mean_se = 0;
  double variance = 0, variance_se = 0;
  double third_cumulant = 0, third_cumulant_se = 0;
  std::vector<MgfPoint> mgf;
};

// Neumaier compensated sum (partition-independent up to rounding).
double compensated_sum(std::span<const double> xs);

MomentReport compute_moments(std::span<const double> samples);

// Moments plus mean of e^{z x} with SE per z. Throws std::domain_error if
// some z would overflow, echoing the admissible |z| bound.
MomentReport empirical_mgf(std::span<const double> samples,
                           std::span<const double> z_grid);

struct Verdict {
  std::string statistic;
  double value = 0;
  double oracle = 0;
  double se = 0;          // standard error of the comparison
  double tol_se = 3;      // tolerance in SE units
  double allowance = 0;   // extra absolute allowance (discretization bias)
  bool pass = false;
  std::string context;
};

Verdict make_verdict(const std::string& statistic, double value, double oracle,
                     double se, double tol_se, const std::string& context,
                     double allowance = 0);

// SE multiple m such that a family of `family_size` two-sided checks at m SE
// has the same family-wise error as one check at base_multiplier SE.
double bonferroni_multiplier(int family_size, double base_multiplier = 3.0);

// Compares mean, variance, third cumulant, and the MGF on z_grid between two
// independent sample sets; each verdict at tol_se standard errors of the
// difference (the spec'd 4 SE default covers the Bonferroni families here).
std::vector<Verdict> two_sample_identity_test(std::span<const double> a,
                                              std::span<const double> b,
                                              std::span<const double> z_grid,
                                              double tol_se = 4.0,
                                              const std::string& context = "");

// Gaussian-limit verdicts: mean ~ 0, variance ~ target (exact at finite N),
// third cumulant ~ exact_k3, MGF ~ exp(z^2 sigma^2 / 2).
std::vector<Verdict> gaussian_limit_test(std::span<const double> samples,
                                         double target_variance, double exact_k3,
                                         std::span<const double> z_grid,
                                         const std::string& context = "");

// Bootstrap SE of a statistic (mean/variance/k3 selector), for estimator
// sanity checks against the jackknife.
enum class StatKind { Mean, Variance, ThirdCumulant };
double bootstrap_se(std::span<const double> samples, StatKind stat, int resamples,
                    uint64_t seed);

}  // namespace intlace
