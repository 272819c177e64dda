#pragma once

#include <vector>

namespace intlace {

// Radially symmetric smooth bump rho supported in B(0,1) with unit mass,
// scaled to rho_eps = eps^-3 rho(./eps), and the mollified Green function
// G_eps = rho_eps * G * rho_eps (d = 3). For r >= 2 eps, G_eps(r) = G(r)
// exactly; below, it is read from a dense radial table of the Newton-shell
// form built at construction.
class Mollifier {
 public:
  explicit Mollifier(double epsilon);

  double epsilon() const { return eps_; }

  // rho_eps at radius r
  double rho(double r) const;
  double rho_sup() const { return rho(0); }

  // quadrature check of int rho_eps = 1 (for tests)
  double mass_quadrature() const;

  // G_eps(r); exact G(r) for r >= 2 eps
  double green(double r) const;
  double green0() const { return g_table_[0]; }

 private:
  double eps_;
  std::vector<double> g_table_;  // G_eps on [0, 2 eps], uniform grid
  double dr_;
};

}  // namespace intlace
