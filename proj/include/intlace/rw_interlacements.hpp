#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "intlace/geom.hpp"
#include "intlace/green.hpp"
#include "intlace/potential.hpp"
#include "intlace/rng.hpp"
#include "intlace/testfunc.hpp"

namespace intlace {

// Occupation times of random interlacements restricted to a finite window.
struct OccupationField {
  double level = 0;
  uint64_t trajectory_count = 0;
  std::vector<double> times;  // aligned with the sampler's window sites
};

enum class WalkMode { Exact, Truncated };

// Unbiased sampler of (L_{x,u})_{x in K}: Poisson(u cap K) walks started
// from e_K / cap(K), continuous time via Exp(1) holding times, resampled
// through the hitting kernel when they leave the escape ball (exact mode)
// or killed there (truncated mode, with a reported bias bound).
class InterlacementSampler {
 public:
  InterlacementSampler(std::vector<LatticePoint> window, const GreenTable& table,
                       int R_escape, WalkMode mode);

  const std::vector<LatticePoint>& window() const { return window_; }
  const EquilibriumData& eq() const { return eq_; }
  double capacity() const { return eq_.capacity; }
  WalkMode mode() const { return mode_; }
  int escape_radius() const { return R_; }

  void sample(double u, Rng& rng, OccupationField& out) const;

  // Monotone coupling: one labelled cloud at u_hi; low field keeps only the
  // trajectories with label <= u_lo. Pointwise low <= high by construction.
  void sample_coupled(double u_lo, double u_hi, Rng& rng, OccupationField& low,
                      OccupationField& high) const;

  // Documented per-site bias bound of truncated mode for E[L_{x,u}].
  double truncation_bias_bound(double u) const;

 private:
  struct ShellEntry {
    int rep = -1;       // index into reps_
    uint8_t perm = 0;   // permutation code
    uint8_t signs = 0;  // sign-flip bits
  };
  struct RepKernel {
    double mass = 0;
    std::vector<double> cdf;  // over window sites, unnormalized (sums to mass)
  };

  void run_trajectory(Rng& rng, std::vector<double>& times) const;
  bool window_symmetric() const;
  size_t shell_index(const LatticePoint& x) const;

  std::vector<LatticePoint> window_;
  int dim_;
  int R_;
  WalkMode mode_;
  const GreenTable* table_;
  EquilibriumData eq_;
  std::vector<double> start_cdf_;

  // window membership: dense cube over the bounding box -> site index + 1
  int wlo_[kMaxDim] = {}, whi_[kMaxDim] = {};
  std::vector<int32_t> windex_;

  // escape shell resampling data (exact mode)
  std::vector<ShellEntry> shell_;
  std::vector<int32_t> shell_cube_;  // (x+S, y+S, z+S) -> shell site index
  std::vector<RepKernel> reps_;
  double max_return_mass_ = 0;
};

// Rescaled measures built from one occupation field draw.
enum class Regime { ConstantIntensity, CenteredHighIntensity };

struct RescaledMeasure {
  int N = 1;
  double level = 0;
  Regime regime = Regime::ConstantIntensity;
  const std::vector<LatticePoint>* sites = nullptr;
  std::vector<double> atoms;  // mass at y = x/N
};

// constant: atoms = L_x / (d N^2); centered: (L_x - u_N) / (d N^2 a_N) with
// a_N = sqrt((2/d) N^{d-2} u_N).
RescaledMeasure build_rescaled_measure(const OccupationField& field,
                                       const std::vector<LatticePoint>& window, int N,
                                       int dim, Regime regime, double u_N);

// <measure, V> = sum atoms V(x/N); rejects V with support outside the window.
double pair_measure(const RescaledMeasure& m, const TestFunctionSpec& V);

}  // namespace intlace
