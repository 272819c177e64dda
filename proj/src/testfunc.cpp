#include "intlace/testfunc.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "intlace/quadrature.hpp"

namespace intlace {

double bump01(double t) {
  double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t2));
}

double TestFunctionSpec::profile(double r) const {
  switch (kind) {
    case Kind::RadialBump:
      return amplitude * bump01(r / radius);
    case Kind::BoxIndicator:
      throw std::logic_error("profile: indicator is not radial in r");
    case Kind::SeparableBump:
      throw std::logic_error("profile: separable spec is not radial");
  }
  return 0;
}

double TestFunctionSpec::operator()(const double* y) const {
  switch (kind) {
    case Kind::RadialBump: {
      double n2 = 0;
      for (int i = 0; i < dim; ++i) {
        double t = y[i] - center[i];
        n2 += t * t;
      }
      return amplitude * bump01(std::sqrt(n2) / radius);
    }
    case Kind::BoxIndicator: {
      for (int i = 0; i < dim; ++i)
        if (std::abs(y[i] - center[i]) > radius) return 0.0;
      return amplitude;
    }
    case Kind::SeparableBump: {
      double p = amplitude;
      for (int i = 0; i < dim; ++i) {
        p *= bump01((y[i] - center[i]) / radius);
        if (p == 0) return 0.0;
      }
      return p;
    }
  }
  return 0;
}

double TestFunctionSpec::eval3(const Vec3& y) const {
  double v[3] = {y.x, y.y, y.z};
  return (*this)(v);
}

LatticeFunction TestFunctionSpec::restrict_to_lattice(int N) const {
  LatticeFunction f;
  int lo[kMaxDim], hi[kMaxDim];
  for (int i = 0; i < dim; ++i) {
    lo[i] = int(std::floor((center[i] - radius) * N)) - 1;
    hi[i] = int(std::ceil((center[i] + radius) * N)) + 1;
  }
  LatticePoint p;
  for (int i = 0; i < dim; ++i) p.c[i] = lo[i];
  for (;;) {
    double y[kMaxDim];
    for (int i = 0; i < dim; ++i) y[i] = double(p.c[i]) / N;
    double v = (*this)(y);
    if (v != 0) {
      f.sites.push_back(p);
      f.values.push_back(v);
    }
    int i = 0;
    for (; i < dim; ++i) {
      if (++p.c[i] <= hi[i]) break;
      p.c[i] = lo[i];
    }
    if (i == dim) break;
  }
  return f;
}

std::string TestFunctionSpec::describe() const {
  const char* k = kind == Kind::RadialBump     ? "bump"
                  : kind == Kind::BoxIndicator ? "indicator"
                                               : "separable-bump";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s(d=%d,A=%g,R=%g,c=(%g,%g,%g))", k, dim, amplitude,
                radius, center[0], center[1], center[2]);
  return buf;
}

namespace {
constexpr double kPi = std::numbers::pi;

void require_radial3(const TestFunctionSpec& V, const char* who) {
  if (V.kind != TestFunctionSpec::Kind::RadialBump || V.dim != 3)
    throw std::invalid_argument(std::string(who) + ": needs a radial bump in d=3");
}
}  // namespace

double integral_V(const TestFunctionSpec& V, double tol) {
  switch (V.kind) {
    case TestFunctionSpec::Kind::RadialBump: {
      if (V.dim != 3) throw std::invalid_argument("integral_V: radial bump only in d=3");
      auto f = [&](double s) { return s * s * V.profile(s); };
      return 4 * kPi * integrate_1d(f, 0, V.radius, tol / (4 * kPi));
    }
    case TestFunctionSpec::Kind::BoxIndicator:
      return V.amplitude * std::pow(2 * V.radius, V.dim);
    case TestFunctionSpec::Kind::SeparableBump: {
      auto f = [&](double t) { return bump01(t / V.radius); };
      double one = integrate_1d(f, -V.radius, V.radius, tol);
      return V.amplitude * std::pow(one, V.dim);
    }
  }
  return 0;
}

double integral_V2(const TestFunctionSpec& V, double tol) {
  switch (V.kind) {
    case TestFunctionSpec::Kind::RadialBump: {
      if (V.dim != 3) throw std::invalid_argument("integral_V2: radial bump only in d=3");
      auto f = [&](double s) {
        double v = V.profile(s);
        return s * s * v * v;
      };
      return 4 * kPi * integrate_1d(f, 0, V.radius, tol / (4 * kPi));
    }
    case TestFunctionSpec::Kind::BoxIndicator:
      return V.amplitude * V.amplitude * std::pow(2 * V.radius, V.dim);
    case TestFunctionSpec::Kind::SeparableBump: {
      auto f = [&](double t) {
        double b = bump01(t / V.radius);
        return b * b;
      };
      double one = integrate_1d(f, -V.radius, V.radius, tol);
      return V.amplitude * V.amplitude * std::pow(one, V.dim);
    }
  }
  return 0;
}

// corr(r) = (2 pi / r) int_0^R s V(s) [ int_{|s-r|}^{min(s+r,R)} t V(t) dt ] ds
double autocorrelation(const TestFunctionSpec& V, double r, double tol) {
  require_radial3(V, "autocorrelation");
  const double R = V.radius;
  if (r >= 2 * R) return 0.0;
  if (r < 1e-12) return integral_V2(V, tol);
  auto inner = [&](double s) {
    double a = std::abs(s - r), b = std::min(s + r, R);
    if (a >= b) return 0.0;
    auto g = [&](double t) { return t * V.profile(t); };
    return s * V.profile(s) * integrate_1d(g, a, b, tol * 0.1);
  };
  return (2 * kPi / r) * integrate_1d(inner, 0, R, tol * r / (2 * kPi));
}

double vGv_continuum(const TestFunctionSpec& V, double tol) {
  // int G(z) corr(z) dz = 2 int_0^{2R} rho corr(rho) drho   (d=3, c_3 = 1/2pi)
  require_radial3(V, "vGv_continuum");
  auto f = [&](double rho) { return rho * autocorrelation(V, rho, tol * 0.01); };
  return 2.0 * integrate_1d(f, 0, 2 * V.radius, tol / 2);
}

double vG2v_continuum(const TestFunctionSpec& V, double tol) {
  // int G^2(z) corr(z) dz = (1/pi) int_0^{2R} corr(rho) drho
  require_radial3(V, "vG2v_continuum");
  auto f = [&](double rho) { return autocorrelation(V, rho, tol * 0.01); };
  return integrate_1d(f, 0, 2 * V.radius, tol * kPi) / kPi;
}

double fGh_continuum(const TestFunctionSpec& f, const TestFunctionSpec& h, double tol) {
  require_radial3(f, "fGh_continuum");
  require_radial3(h, "fGh_continuum");
  double D2 = 0;
  for (int i = 0; i < 3; ++i) {
    double t = f.center[i] - h.center[i];
    D2 += t * t;
  }
  const double D = std::sqrt(D2);
  const double Rf = f.radius, Rh = h.radius;
  // centered cross-correlation C0(r) = int f0(y) h0(y+z) dy, |z| = r
  auto cross = [&](double r) -> double {
    if (r >= Rf + Rh) return 0.0;
    if (r < 1e-12) {
      auto g = [&](double s) { return s * s * f.profile(s) * h.profile(s); };
      return 4 * kPi * integrate_1d(g, 0, std::min(Rf, Rh), tol * 0.01);
    }
    auto inner = [&](double s) {
      double a = std::abs(s - r), b = std::min(s + r, Rh);
      if (a >= b) return 0.0;
      auto g = [&](double t) { return t * h.profile(t); };
      return s * f.profile(s) * integrate_1d(g, a, b, tol * 0.001);
    };
    return (2 * kPi / r) * integrate_1d(inner, 0, Rf, tol * 0.01 * r / (2 * kPi));
  };
  // sphere average of G about a center at distance D: c_3 / max(D, rho)
  auto outer = [&](double rho) {
    if (rho < 1e-14) return 0.0;
    return cross(rho) * 2.0 * rho * rho / std::max(D, rho);
  };
  return integrate_1d(outer, 0, Rf + Rh, tol / 2);
}

}  // namespace intlace
