#pragma once

#include <functional>
#include <vector>

#include "intlace/geom.hpp"
#include "intlace/green.hpp"
#include "intlace/mollifier.hpp"
#include "intlace/potential.hpp"
#include "intlace/testfunc.hpp"

namespace intlace {

struct LaplaceExponentResult {
  double value = 0;
  bool domain_ok = false;
  double residual = 0;           // linear-system residual
  double series_tail_bound = 0;  // Neumann tail bound from the operator norm
  double operator_norm = 0;
};

// Exponent of Eq-style lattice Laplace transform:
//   log E[exp{ sum_x V(x/N) L_{x,u} / (d N^2) }]
//   = (u/d) N^{d-2} <V, (I - G_N V)^{-1} 1>_{L_N}
LaplaceExponentResult lattice_laplace_exponent(const LatticeFunction& V, int N, double u,
                                               const GreenTable& table);

// <V, (G_N V)^{power} 1>_{L_N}; power 1 gives <V, G_N V>_{L_N}.
double lattice_v_gnv_power(const LatticeFunction& V, int N, const GreenTable& table,
                           int power);

// Nystrom evaluation of alpha <V, (I - GV)^{-1} 1> on a cubic grid covering
// supp V (d = 3). Off-diagonal kernel G(y-y') h^3, diagonal the analytic
// integral of G over the volume-equivalent ball. Dense solve below 4000
// unknowns, Neumann iteration above (the checked norm < 1 guarantees it).
struct ContinuumLaplaceResult {
  double value = 0;
  bool domain_ok = false;
  double residual = 0;
  double operator_norm = 0;
  double refinement_delta = 0;  // |value(h) - value(2h)| Richardson check
  int nodes = 0;
};
ContinuumLaplaceResult continuum_laplace_exponent(const TestFunctionSpec& V, double alpha,
                                                  double spacing,
                                                  bool richardson_check = true);

// Radial reduction of the same operator (V radial): independent 1D Nystrom
// cross-check of the continuum exponent.
double continuum_laplace_exponent_radial(const TestFunctionSpec& V, double alpha,
                                         int nodes = 600);

// (2/b_N) sum_{x,x'} V(x/N) g^2(x-x') V(x'/N) with b_N = N^4 (d=3),
// N^4 log N (d=4), N^d (d>=5).
double variance_b_n_sum(const TestFunctionSpec& V, int N, const GreenTable& table);

// sum over Z^d of g(x)^2 by direct summation over |x|_inf <= table range,
// plus an integral-comparison tail bound (reported via *tail_bound).
double lattice_green_squared_sum(const GreenTable& table, double* tail_bound = nullptr);

// Regularized-determinant MGF oracle for Wick-square functionals
//   S = (1/(2 N^3)) sum_{y in grid} V(y) :(field_y + sqrt(2 alpha))^2:
// with field covariance kernel(y, y'): E[e^{zS}] =
//   exp(alpha z <V, (I - z K V)^{-1} 1>_{L_N}) / sqrt(det2(I - z K V)).
struct Det2MgfResult {
  double value = 0;
  double det2 = 1;
  double exponent = 0;
  double z_max = 0;  // admissible bound 0.5 / norm
};
using KernelFn = std::function<double(const Vec3&, const Vec3&)>;
Det2MgfResult det2_mgf_oracle(const std::vector<Vec3>& grid,
                              const std::vector<double>& v_values, int N,
                              const KernelFn& kernel, double z, double alpha);

// Hilbert-Schmidt diagnostics between two kernels on a grid:
// (1/N^6) sum (K1 - K2)^2 and (1/N^6) sum (K1^2 + K2^2).
void kernel_hs_diagnostics(const std::vector<Vec3>& grid, int N, const KernelFn& k1,
                           const KernelFn& k2, double* hs_diff, double* hs_bound);

// kernels for det2_mgf_oracle
KernelFn mollified_kernel(const Mollifier& moll);
KernelFn lattice_kernel(const GreenTable& table, int N);  // g_N(y-y')

}  // namespace intlace
