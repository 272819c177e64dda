#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "intlace/geom.hpp"

namespace intlace {

// c_d = Gamma(d/2 - 1) / (2 pi^{d/2}), so the Brownian Green function is
// G(y) = c_d |y|^{2-d}.
double continuum_green_constant(int dim);

// G(y); returns +inf at y = 0.
double green_continuum(const double* y, int dim);
double green_continuum_r(double r, int dim);  // radial form, r = |y|

// Expected-time Green function of simple random walk, evaluated directly
// from the Fourier representation
//   g(x) = (2pi)^-d int_{[-pi,pi]^d} cos(x.theta) / (1 - (1/d) sum cos theta_j) dtheta
// by adaptive tensor quadrature; the 1/|theta|^2 singularity is removed by
// subtracting 2d/|theta|^2 over a ball and integrating that part exactly.
// Absolute error <= tol. Throws std::invalid_argument for dim < 3.
double green_lattice(const LatticePoint& x, int dim, double tol);

// Scaled modified Bessel I_n(s) e^{-s} for n = 0..nmax, written to out.
// Miller downward recursion for small s, concentrated-integral form beyond.
void bessel_i_scaled(int nmax, double s, double* out);

// Tabulated g on the octant cube 0 <= |x_j| <= range, built from the
// coordinate-integrated form g(x) = d int_0^inf prod_j e^{-s} I_{x_j}(s) ds
// on a fixed quadrature grid (deterministic, shared by all entries).
// Beyond the range, tail_mode substitutes the asymptotic d G(x).
class GreenTable {
 public:
  GreenTable(int dim, int range, double tol);

  int dim() const { return dim_; }
  int range() const { return range_; }
  double tol() const { return tol_; }
  bool tail_mode = true;

  double g0() const { return values_[0]; }

  // g(x); |x|_inf beyond range uses the asymptotic when tail_mode is set,
  // otherwise throws std::out_of_range.
  double at(const LatticePoint& x) const;

  // raw octant access for hot loops; caller supplies |x_j| <= range
  double at_abs_unchecked(const int* a) const {
    size_t idx = 0;
    for (int i = 0; i < dim_; ++i) idx = idx * (range_ + 1) + a[i];
    return values_[idx];
  }
  const std::vector<double>& octant() const { return values_; }

  // versioned binary cache keyed by (dim, range, tol); bit-identical
  void save(const std::string& path) const;
  static GreenTable load(const std::string& path);
  static GreenTable load_or_build(const std::string& cache_dir, int dim, int range,
                                  double tol);

 private:
  GreenTable() = default;
  int dim_ = 0, range_ = 0;
  double tol_ = 0;
  std::vector<double> values_;
};

// g_N(y, y') = (1/d) N^{d-2} g(Ny, Ny'); arguments must be points of the
// lattice (1/N) Z^d (checked; throws std::invalid_argument otherwise).
double green_rescaled(const double* y, const double* yp, int N, const GreenTable& table);

// g_N from an integer offset x = N(y - y').
double green_rescaled_offset(const LatticePoint& x, int N, const GreenTable& table);

}  // namespace intlace
