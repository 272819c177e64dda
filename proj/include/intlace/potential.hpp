#pragma once

#include <Eigen/Dense>
#include <vector>

#include "intlace/geom.hpp"
#include "intlace/green.hpp"

namespace intlace {

// Finitely supported function on the lattice L_N = (1/N) Z^d, stored as
// integer sites x (the L_N point is x/N) with their values.
struct LatticeFunction {
  std::vector<LatticePoint> sites;
  std::vector<double> values;

  size_t size() const { return sites.size(); }
};

// Equilibrium measure and capacity of a finite lattice set K, from the
// linear system (G_K e)(x) = sum_y g(x-y) e(y) = 1 on K.
struct EquilibriumData {
  int dim = 3;
  std::vector<LatticePoint> sites;
  Eigen::VectorXd weights;  // e_K(x), nonnegative
  double capacity = 0;      // sum of weights
  Eigen::LLT<Eigen::MatrixXd> green_factor;

  Eigen::VectorXd apply_green_inverse(const Eigen::VectorXd& rhs) const {
    return green_factor.solve(rhs);
  }
};

EquilibriumData equilibrium_measure_lattice(const std::vector<LatticePoint>& K,
                                            const GreenTable& table,
                                            double solver_tol = 1e-10);

// First-entrance kernel H(x,.) = g(x,.) (G_K)^{-1}: sub-probability over the
// sites of K for x outside K. Entries clamped to [0,1] within solver noise.
Eigen::VectorXd hitting_kernel(const LatticePoint& x, const EquilibriumData& eq,
                               const GreenTable& table);

// Total mass P_x[H_K < infty] = sum_z g(x-z) e_K(z); cheap, no solve.
double hitting_mass(const LatticePoint& x, const EquilibriumData& eq,
                    const GreenTable& table);

// cap(B(0,r)) = r^{d-2} / c_d in R^d; for d = 3 this is 2 pi r.
double capacity_ball_continuum(double r, int dim);

// (G_N f)(x/N) = (1/(d N^2)) sum_{x'} g(x-x') f(x'/N)
double apply_green_operator_at(const LatticePoint& x, const LatticeFunction& f, int N,
                               const GreenTable& table);
std::vector<double> apply_green_operator(const std::vector<LatticePoint>& eval_sites,
                                         const LatticeFunction& f, int N,
                                         const GreenTable& table);

// Exact operator norm ||G_N |V|||_{Linf -> Linf}: by the maximum principle
// the sup of G_N |V| is attained on supp V or its neighbor sites.
double green_operator_norm(const LatticeFunction& V, int N, const GreenTable& table);

// <f,h>_{L_N} = N^{-d} sum f h over the common support
double lattice_inner(const LatticeFunction& f, const LatticeFunction& h, int N, int dim);

struct ResolventResult {
  Eigen::VectorXd on_support;  // (I - G_N V)^{-1} rhs restricted to supp V
  double residual = 0;         // inf-norm residual of the dense system
  double operator_norm = 0;    // ||G_N |V|||, for reporting
};

// Solves (I - G_N V) f = rhs by a dense solve on supp V. rhs_on_support
// holds rhs at V.sites. Requires ||G_N |V||| < 1; otherwise throws
// std::domain_error (outside the Laplace domain).
ResolventResult solve_resolvent_lattice(const LatticeFunction& V, int N,
                                        const GreenTable& table,
                                        const Eigen::VectorXd& rhs_on_support);

// One Neumann-step extension of the resolvent solution off the support:
// f(x) = rhs(x) + (G_N (V f_S))(x).
double resolvent_extend(const LatticePoint& x, double rhs_at_x, const LatticeFunction& V,
                        const Eigen::VectorXd& f_on_support, int N,
                        const GreenTable& table);

}  // namespace intlace
