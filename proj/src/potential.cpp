#include "intlace/potential.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace intlace {

EquilibriumData equilibrium_measure_lattice(const std::vector<LatticePoint>& K,
                                            const GreenTable& table, double solver_tol) {
  if (K.empty()) throw std::invalid_argument("equilibrium_measure_lattice: empty K");
  const int n = int(K.size());
  const int dim = table.dim();

  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = table.at(sub(K[i], K[j], dim));
      G(i, j) = v;
      G(j, i) = v;
    }

  EquilibriumData eq;
  eq.dim = dim;
  eq.sites = K;
  eq.green_factor.compute(G);
  if (eq.green_factor.info() != Eigen::Success)
    throw std::runtime_error(
        "equilibrium_measure_lattice: Green matrix not positive definite "
        "(quadrature bug?)");

  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd e = eq.green_factor.solve(ones);
  double resid = (G * e - ones).lpNorm<Eigen::Infinity>();
  if (resid > 100 * solver_tol * n)
    throw std::runtime_error("equilibrium_measure_lattice: solver residual too large");

  for (int i = 0; i < n; ++i) {
    if (e[i] < 0) {
      if (e[i] < -solver_tol)
        throw std::runtime_error(
            "equilibrium_measure_lattice: negative equilibrium weight beyond tolerance");
      e[i] = 0;
    }
  }
  eq.weights = e;
  eq.capacity = e.sum();
  return eq;
}

Eigen::VectorXd hitting_kernel(const LatticePoint& x, const EquilibriumData& eq,
                               const GreenTable& table) {
  const int n = int(eq.sites.size());
  for (int i = 0; i < n; ++i)
    if (eq.sites[i] == x) throw std::invalid_argument("hitting_kernel: x inside K");
  Eigen::VectorXd gx(n);
  for (int i = 0; i < n; ++i) gx[i] = table.at(sub(x, eq.sites[i], eq.dim));
  Eigen::VectorXd h = eq.apply_green_inverse(gx);
  for (int i = 0; i < n; ++i) h[i] = std::clamp(h[i], 0.0, 1.0);
  return h;
}

double hitting_mass(const LatticePoint& x, const EquilibriumData& eq,
                    const GreenTable& table) {
  double m = 0;
  for (size_t i = 0; i < eq.sites.size(); ++i)
    m += table.at(sub(x, eq.sites[i], eq.dim)) * eq.weights[int(i)];
  return std::min(m, 1.0);
}

double capacity_ball_continuum(double r, int dim) {
  if (r <= 0) throw std::invalid_argument("capacity_ball_continuum: r > 0 required");
  return std::pow(r, dim - 2) / continuum_green_constant(dim);
}

double apply_green_operator_at(const LatticePoint& x, const LatticeFunction& f, int N,
                               const GreenTable& table) {
  const int dim = table.dim();
  double s = 0;
  for (size_t j = 0; j < f.sites.size(); ++j)
    s += table.at(sub(x, f.sites[j], dim)) * f.values[j];
  return s / (dim * double(N) * double(N));
}

std::vector<double> apply_green_operator(const std::vector<LatticePoint>& eval_sites,
                                         const LatticeFunction& f, int N,
                                         const GreenTable& table) {
  std::vector<double> out(eval_sites.size());
  for (size_t i = 0; i < eval_sites.size(); ++i)
    out[i] = apply_green_operator_at(eval_sites[i], f, N, table);
  return out;
}

namespace {

struct PointLess {
  bool operator()(const LatticePoint& a, const LatticePoint& b) const {
    return a.c < b.c;
  }
};

}  // namespace

double green_operator_norm(const LatticeFunction& V, int N, const GreenTable& table) {
  const int dim = table.dim();
  LatticeFunction absV;
  absV.sites = V.sites;
  absV.values.resize(V.values.size());
  for (size_t i = 0; i < V.values.size(); ++i) absV.values[i] = std::abs(V.values[i]);

  std::set<LatticePoint, PointLess> eval(V.sites.begin(), V.sites.end());
  for (const auto& s : V.sites)
    for (int i = 0; i < dim; ++i)
      for (int sgn : {-1, 1}) {
        LatticePoint q = s;
        q.c[i] += sgn;
        eval.insert(q);
      }
  double best = 0;
  for (const auto& x : eval)
    best = std::max(best, apply_green_operator_at(x, absV, N, table));
  return best;
}

double lattice_inner(const LatticeFunction& f, const LatticeFunction& h, int N, int dim) {
  if (f.sites.size() != h.sites.size())
    throw std::invalid_argument("lattice_inner: mismatched supports");
  double s = 0;
  for (size_t i = 0; i < f.sites.size(); ++i) s += f.values[i] * h.values[i];
  return s / std::pow(double(N), dim);
}

ResolventResult solve_resolvent_lattice(const LatticeFunction& V, int N,
                                        const GreenTable& table,
                                        const Eigen::VectorXd& rhs_on_support) {
  const int n = int(V.sites.size());
  const int dim = table.dim();
  if (rhs_on_support.size() != n)
    throw std::invalid_argument("solve_resolvent_lattice: rhs size mismatch");

  ResolventResult res;
  res.operator_norm = green_operator_norm(V, N, table);
  if (res.operator_norm >= 1.0)
    throw std::domain_error(
        "solve_resolvent_lattice: ||G_N|V||| >= 1, outside the Laplace domain");

  const double cell = 1.0 / (dim * double(N) * double(N));
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      M(i, j) = (i == j ? 1.0 : 0.0) -
                cell * table.at(sub(V.sites[i], V.sites[j], dim)) * V.values[j];
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  res.on_support = lu.solve(rhs_on_support);
  res.residual = (M * res.on_support - rhs_on_support).lpNorm<Eigen::Infinity>();
  return res;
}

double resolvent_extend(const LatticePoint& x, double rhs_at_x, const LatticeFunction& V,
                        const Eigen::VectorXd& f_on_support, int N,
                        const GreenTable& table) {
  LatticeFunction Vf;
  Vf.sites = V.sites;
  Vf.values.resize(V.sites.size());
  for (size_t j = 0; j < V.sites.size(); ++j) Vf.values[j] = V.values[j] * f_on_support[int(j)];
  return rhs_at_x + apply_green_operator_at(x, Vf, N, table);
}

}  // namespace intlace
