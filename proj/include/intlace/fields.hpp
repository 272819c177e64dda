#pragma once

#include <Eigen/Dense>
#include <vector>

#include "intlace/geom.hpp"
#include "intlace/green.hpp"
#include "intlace/mollifier.hpp"
#include "intlace/potential.hpp"
#include "intlace/rng.hpp"
#include "intlace/testfunc.hpp"

namespace intlace {

// Shared lower-triangular factor of a covariance matrix; samplers draw
// iid standard normals and apply it. The factor is immutable after
// construction and safe to share across threads.
class CovarianceFactor {
 public:
  explicit CovarianceFactor(const Eigen::MatrixXd& cov);

  int size() const { return int(L_.rows()); }

  // out = L z with z iid N(0,1) from rng
  void sample(Rng& rng, double* out) const;

  const Eigen::MatrixXd& factor() const { return L_; }

 private:
  Eigen::MatrixXd L_;
};

// Full-space massless GFF restricted to a finite window: covariance
// g(x - x') from the table.
class DiscreteGffSampler {
 public:
  DiscreteGffSampler(std::vector<LatticePoint> window, const GreenTable& table);

  const std::vector<LatticePoint>& window() const { return window_; }
  int dim() const { return dim_; }
  double g0() const { return g0_; }
  size_t size() const { return window_.size(); }

  void sample(Rng& rng, std::vector<double>& out) const;

 private:
  std::vector<LatticePoint> window_;
  int dim_;
  double g0_;
  CovarianceFactor factor_;
};

// Mollified continuum GFF Phi_{y,eps} on a finite set of points in R^3:
// covariance G_eps(|y - y'|).
class MollifiedGffSampler {
 public:
  MollifiedGffSampler(std::vector<Vec3> grid, const Mollifier& moll);

  const std::vector<Vec3>& grid() const { return grid_; }
  double variance() const { return var_; }  // G_eps(0)
  size_t size() const { return grid_.size(); }

  void sample(Rng& rng, std::vector<double>& out) const;

 private:
  std::vector<Vec3> grid_;
  double var_;
  CovarianceFactor factor_;
};

// :phi^2: = phi^2 - variance_const, pointwise
std::vector<double> wick_square(const std::vector<double>& values, double variance_const);

// :(phi + shift)^2: = (phi + shift)^2 - variance_const
//                   = :phi^2: + 2 shift phi + shift^2; shift >= 0 required
std::vector<double> shifted_wick_square(const std::vector<double>& values,
                                        double variance_const, double shift);

// Riemann pairing (cell_weight) sum_i V_i w_i for per-site values w.
// V evaluated at sites/N (lattice) or at grid points (continuum).
double pair_values_lattice(const std::vector<LatticePoint>& sites,
                           const std::vector<double>& values, const TestFunctionSpec& V,
                           int N);
double pair_values_grid(const std::vector<Vec3>& grid, const std::vector<double>& values,
                        const TestFunctionSpec& V, double spacing);

// Checks that every lattice site where V(x/N) != 0 belongs to the window;
// throws std::invalid_argument otherwise (a silent miss would bias results).
void require_support_covered(const std::vector<LatticePoint>& window,
                             const TestFunctionSpec& V, int N, int dim);

}  // namespace intlace
