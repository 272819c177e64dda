#include "intlace/mollifier.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "intlace/green.hpp"
#include "intlace/quadrature.hpp"
#include "intlace/testfunc.hpp"

namespace intlace {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kEtaN = 2000;  // unit-scale table resolution on [0, 2]

// Everything is built once at unit scale (eps = 1) and rescaled:
// rho_eps = eps^-3 rho1(./eps), eta_eps = eps^-3 eta1(./eps),
// G_eps(r) = (1/2pi) [ M1(r/eps)/r + T1(r/eps)/eps ].
struct UnitTables {
  double c0;                      // normalization of rho1
  std::vector<double> M1, T1;     // shell mass below / weighted tail above
  double dr;

  UnitTables() {
    auto f = [](double r) { return r * r * bump01(r); };
    c0 = 1.0 / (4 * kPi * integrate_1d(f, 0.0, 1.0, 1e-14));
    auto rho1 = [this](double r) { return c0 * bump01(r); };

    auto eta1 = [&](double r) -> double {
      if (r >= 2.0) return 0.0;
      if (r < 1e-14) {
        auto g = [&](double s) {
          double v = rho1(s);
          return s * s * v * v;
        };
        return 4 * kPi * integrate_1d(g, 0.0, 1.0, 1e-12);
      }
      auto inner = [&](double s) {
        double a = std::abs(s - r), b = std::min(s + r, 1.0);
        if (a >= b) return 0.0;
        auto g = [&](double t) { return t * rho1(t); };
        return s * rho1(s) * integrate_1d(g, a, b, 1e-12);
      };
      return (2 * kPi / r) * integrate_1d(inner, 0.0, 1.0, 1e-11 * r);
    };

    dr = 2.0 / kEtaN;
    std::vector<double> eta(kEtaN + 1);
    for (int i = 0; i <= kEtaN; ++i) eta[i] = eta1(i * dr);

    M1.assign(kEtaN + 1, 0.0);
    T1.assign(kEtaN + 1, 0.0);
    for (int i = 1; i <= kEtaN; ++i) {
      double r0 = (i - 1) * dr, r1 = i * dr;
      M1[i] = M1[i - 1] + 0.5 * dr * 4 * kPi * (r0 * r0 * eta[i - 1] + r1 * r1 * eta[i]);
    }
    for (int i = kEtaN - 1; i >= 0; --i) {
      double r0 = i * dr, r1 = (i + 1) * dr;
      T1[i] = T1[i + 1] + 0.5 * dr * 4 * kPi * (r0 * eta[i] + r1 * eta[i + 1]);
    }
    // absorb the tiny quadrature defect of the total mass, so the shell
    // potential is exactly 1/(2 pi r) at r = 2 and beyond
    double mass = M1[kEtaN];
    for (auto& v : M1) v /= mass;
    for (auto& v : T1) v /= mass;
  }

  double interp(const std::vector<double>& tab, double t) const {
    double u = t / dr;
    int i = int(u);
    if (i >= kEtaN) return tab[kEtaN];
    double frac = u - i;
    return tab[i] * (1 - frac) + tab[i + 1] * frac;
  }
};

const UnitTables& unit_tables() {
  static UnitTables t;
  return t;
}
}  // namespace

Mollifier::Mollifier(double epsilon) : eps_(epsilon) {
  if (epsilon <= 0) throw std::invalid_argument("Mollifier: epsilon > 0 required");
  const UnitTables& U = unit_tables();
  dr_ = 2 * eps_ / kEtaN;
  g_table_.resize(kEtaN + 1);
  for (int i = 0; i <= kEtaN; ++i) {
    double r = i * dr_;
    double t = r / eps_;
    double pot = (i == 0) ? U.T1[0] / eps_ : (U.interp(U.M1, t) / r + U.interp(U.T1, t) / eps_);
    g_table_[i] = pot / (2 * kPi);
  }
}

double Mollifier::rho(double r) const {
  return unit_tables().c0 / (eps_ * eps_ * eps_) * bump01(r / eps_);
}

double Mollifier::mass_quadrature() const {
  auto f = [&](double r) { return r * r * rho(r); };
  return 4 * kPi * integrate_1d(f, 0.0, eps_, 1e-13);
}

double Mollifier::green(double r) const {
  if (r >= 2 * eps_) return green_continuum_r(r, 3);
  double t = r / dr_;
  int i = int(t);
  if (i >= int(g_table_.size()) - 1) return g_table_.back();
  double frac = t - i;
  return g_table_[i] * (1 - frac) + g_table_[i + 1] * frac;
}

}  // namespace intlace
