#pragma once

#include <string>
#include <vector>

#include "intlace/geom.hpp"
#include "intlace/potential.hpp"

namespace intlace {

// Test functions V paired with fields and occupation measures. Radial bump
// is the default everywhere; the box indicator and the separable per-axis
// bump (used for the d >= 4 lattice-sum checks) are alternatives.
struct TestFunctionSpec {
  enum class Kind { RadialBump, BoxIndicator, SeparableBump };

  Kind kind = Kind::RadialBump;
  int dim = 3;
  double amplitude = 0.1;
  double radius = 1.0;
  std::array<double, kMaxDim> center{};

  double operator()(const double* y) const;
  double eval3(const Vec3& y) const;

  // radial profile value at distance r from the center (RadialBump only)
  double profile(double r) const;

  // all integer sites x with V(x/N) != 0, plus their values
  LatticeFunction restrict_to_lattice(int N) const;

  std::string describe() const;
};

// smooth standard bump, exp(1 - 1/(1-t^2)) for |t|<1, else 0; peak value 1
double bump01(double t);

// ---- deterministic continuum functionals (d = 3, radial or separable) ----

// int V dy
double integral_V(const TestFunctionSpec& V, double tol = 1e-10);
// int V^2 dy
double integral_V2(const TestFunctionSpec& V, double tol = 1e-10);

// radial autocorrelation corr(r) = int V(y) V(y+z) dy at |z| = r (centered
// radial V; the center drops out)
double autocorrelation(const TestFunctionSpec& V, double r, double tol = 1e-9);

// <V, G V> = int int V(y) G(y-y') V(y') dy dy'   (d = 3)
double vGv_continuum(const TestFunctionSpec& V, double tol = 1e-9);

// int int V(y) G^2(y-y') V(y') dy dy'   (d = 3)
double vG2v_continuum(const TestFunctionSpec& V, double tol = 1e-9);

// <f, G h> for two radial functions with centers a distance D apart (d = 3)
double fGh_continuum(const TestFunctionSpec& f, const TestFunctionSpec& h,
                     double tol = 1e-9);

}  // namespace intlace
