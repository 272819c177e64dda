#include "intlace/oracles.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "intlace/parallel.hpp"
#include "intlace/quadrature.hpp"

namespace intlace {

namespace {
constexpr double kPi = std::numbers::pi;
}

LaplaceExponentResult lattice_laplace_exponent(const LatticeFunction& V, int N, double u,
                                               const GreenTable& table) {
  LaplaceExponentResult res;
  const int dim = table.dim();
  if (V.sites.empty()) {
    res.domain_ok = true;
    res.value = 0;
    return res;
  }
  res.operator_norm = green_operator_norm(V, N, table);
  if (res.operator_norm >= 1.0) {
    res.domain_ok = false;
    return res;
  }
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(int(V.sites.size()));
  ResolventResult r = solve_resolvent_lattice(V, N, table, ones);
  double inner = 0;
  for (size_t i = 0; i < V.sites.size(); ++i) inner += V.values[i] * r.on_support[int(i)];
  inner /= std::pow(double(N), dim);
  res.value = u / dim * std::pow(double(N), dim - 2) * inner;
  res.domain_ok = true;
  res.residual = r.residual;
  // Neumann tail beyond 30 terms, |V|_1-weighted geometric bound
  double vnorm1 = 0;
  for (double v : V.values) vnorm1 += std::abs(v);
  vnorm1 /= std::pow(double(N), dim);
  res.series_tail_bound = u / dim * std::pow(double(N), dim - 2) * vnorm1 *
                          std::pow(res.operator_norm, 30) / (1 - res.operator_norm);
  return res;
}

double lattice_v_gnv_power(const LatticeFunction& V, int N, const GreenTable& table,
                           int power) {
  const int dim = table.dim();
  std::vector<double> f(V.sites.size(), 1.0);
  LatticeFunction Vf;
  Vf.sites = V.sites;
  Vf.values.resize(V.sites.size());
  for (int p = 0; p < power; ++p) {
    for (size_t i = 0; i < V.sites.size(); ++i) Vf.values[i] = V.values[i] * f[i];
    for (size_t i = 0; i < V.sites.size(); ++i)
      f[i] = apply_green_operator_at(V.sites[i], Vf, N, table);
  }
  double s = 0;
  for (size_t i = 0; i < V.sites.size(); ++i) s += V.values[i] * f[i];
  return s / std::pow(double(N), dim);
}

// ---------------------------------------------------------------------------
// continuum Nystrom

namespace {

struct NystromGrid {
  std::vector<Vec3> pts;
  std::vector<double> v;
};

NystromGrid build_grid(const TestFunctionSpec& V, double spacing) {
  if (V.dim != 3)
    throw std::invalid_argument("continuum_laplace_exponent: d = 3 only");
  NystromGrid g;
  double R = V.radius + spacing;
  int m = int(std::ceil(R / spacing));
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int k = -m; k <= m; ++k) {
        Vec3 y{V.center[0] + i * spacing, V.center[1] + j * spacing,
               V.center[2] + k * spacing};
        double val = V.eval3(y);
        if (val != 0) {
          g.pts.push_back(y);
          g.v.push_back(val);
        }
      }
  return g;
}

double nystrom_value(const NystromGrid& g, double alpha, double h, double* op_norm,
                     double* residual, bool* domain_ok) {
  const int n = int(g.pts.size());
  const double cell = h * h * h;
  const double ball_a = std::cbrt(3.0 * cell / (4.0 * kPi));
  const double diag = ball_a * ball_a;  // int_{|z|<a} G(z) dz, d=3

  // row sums of the |V| kernel give the grid estimate of ||G|V||_inf
  double norm = 0;
  std::vector<double> krow(n);
  auto kernel_entry = [&](int i, int j) {
    if (i == j) return diag;
    return green_continuum_r((g.pts[i] - g.pts[j]).norm(), 3) * cell;
  };
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < n; ++j) s += kernel_entry(i, j) * std::abs(g.v[j]);
    norm = std::max(norm, s);
  }
  *op_norm = norm;
  if (norm >= 1.0) {
    *domain_ok = false;
    return 0;
  }
  *domain_ok = true;

  std::vector<double> f(n, 1.0);
  if (n <= 4000) {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        M(i, j) = (i == j ? 1.0 : 0.0) - kernel_entry(i, j) * g.v[j];
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd sol = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(rhs);
    *residual = (M * sol - rhs).lpNorm<Eigen::Infinity>();
    for (int i = 0; i < n; ++i) f[i] = sol[i];
  } else {
    // matrix-free Neumann iteration; geometric with ratio <= norm < 1
    std::vector<double> vf(n), gf(n);
    double delta = 1;
    for (int it = 0; it < 400 && delta > 1e-13; ++it) {
      for (int i = 0; i < n; ++i) vf[i] = g.v[i] * f[i];
      delta = 0;
      for (int i = 0; i < n; ++i) {
        double s = diag * vf[i];
        const Vec3 yi = g.pts[i];
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          double r2 = (yi - g.pts[j]).squaredNorm();
          s += cell / (2 * kPi * std::sqrt(r2)) * vf[j];
        }
        double fn = 1.0 + s;
        delta = std::max(delta, std::abs(fn - f[i]));
        gf[i] = fn;
      }
      f.swap(gf);
    }
    *residual = delta;
    if (delta > 1e-10)
      throw std::runtime_error("continuum_laplace_exponent: Neumann iteration stalled");
  }
  double inner = 0;
  for (int i = 0; i < n; ++i) inner += g.v[i] * f[i];
  return alpha * inner * cell;
}

}  // namespace

ContinuumLaplaceResult continuum_laplace_exponent(const TestFunctionSpec& V, double alpha,
                                                  double spacing, bool richardson_check) {
  ContinuumLaplaceResult res;
  NystromGrid fine = build_grid(V, spacing);
  res.nodes = int(fine.pts.size());
  res.value = nystrom_value(fine, alpha, spacing, &res.operator_norm, &res.residual,
                            &res.domain_ok);
  if (!res.domain_ok) return res;
  if (richardson_check) {
    NystromGrid coarse = build_grid(V, 2 * spacing);
    double on, rs;
    bool ok;
    double coarse_val = nystrom_value(coarse, alpha, 2 * spacing, &on, &rs, &ok);
    if (ok) res.refinement_delta = std::abs(res.value - coarse_val);
  }
  return res;
}

double continuum_laplace_exponent_radial(const TestFunctionSpec& V, double alpha,
                                         int nodes) {
  if (V.kind != TestFunctionSpec::Kind::RadialBump || V.dim != 3)
    throw std::invalid_argument("continuum_laplace_exponent_radial: radial d=3 only");
  // (G h)(r) = int_0^R h(s) 2 s^2 / max(r, s) ds on radial functions
  const double R = V.radius;
  const GaussRule& gr = gauss_legendre(16);
  int panels = nodes / 16;
  std::vector<double> r(panels * 16), w(panels * 16), v(panels * 16);
  double hp = R / panels;
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < 16; ++q) {
      int idx = p * 16 + q;
      r[idx] = (p + 0.5) * hp + 0.5 * hp * gr.x[q];
      w[idx] = 0.5 * hp * gr.w[q];
      v[idx] = V.profile(r[idx]);
    }
  const int n = panels * 16;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      M(i, j) = (i == j ? 1.0 : 0.0) -
                2.0 * r[j] * r[j] / std::max(r[i], r[j]) * v[j] * w[j];
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd f = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(rhs);
  double inner = 0;
  for (int i = 0; i < n; ++i) inner += 4 * kPi * r[i] * r[i] * v[i] * f[i] * w[i];
  return alpha * inner;
}

// ---------------------------------------------------------------------------
// b_N lattice sums

namespace {

// dense cube of g^2 over offsets |z_j| <= maxoff (d = 3), tail included
std::vector<double> squared_green_cube3(const GreenTable& table, int maxoff) {
  int side = 2 * maxoff + 1;
  std::vector<double> cube(size_t(side) * side * side);
  LatticePoint p;
  size_t idx = 0;
  for (int x = -maxoff; x <= maxoff; ++x)
    for (int y = -maxoff; y <= maxoff; ++y)
      for (int z = -maxoff; z <= maxoff; ++z) {
        p = lp3(x, y, z);
        double g = table.at(p);
        cube[idx++] = g * g;
      }
  return cube;
}

double bn_sum3(const TestFunctionSpec& V, int N, const GreenTable& table) {
  LatticeFunction f = V.restrict_to_lattice(N);
  const size_t n = f.sites.size();
  int maxoff = 0;
  for (const auto& s : f.sites) maxoff = std::max(maxoff, norm_inf(s, 3));
  maxoff *= 2;
  std::vector<double> cube = squared_green_cube3(table, maxoff);
  const int side = 2 * maxoff + 1;
  const size_t s2 = size_t(side) * side;

  std::vector<int> cx(n), cy(n), cz(n);
  for (size_t i = 0; i < n; ++i) {
    cx[i] = f.sites[i].c[0];
    cy[i] = f.sites[i].c[1];
    cz[i] = f.sites[i].c[2];
  }
  std::vector<double> rows(n);
  parallel_for(n, 2, [&](size_t i) {
    double vi = f.values[i];
    const int xi = cx[i], yi = cy[i], zi = cz[i];
    double row = 0.5 * vi * cube[size_t(maxoff) * s2 + size_t(maxoff) * side + maxoff];
    for (size_t j = i + 1; j < n; ++j) {
      size_t idx = size_t(cx[j] - xi + maxoff) * s2 + size_t(cy[j] - yi + maxoff) * side +
                   size_t(cz[j] - zi + maxoff);
      row += f.values[j] * cube[idx];
    }
    rows[i] = vi * row;
  });
  double total = 0;
  for (size_t i = 0; i < n; ++i) total += rows[i];
  return 2.0 * total;  // both (i,j) orderings plus the diagonal: the full sum
}

// separable V: correlation per axis, then a d-dim octant sum over offsets
double bn_sum_separable(const TestFunctionSpec& V, int N, const GreenTable& table) {
  const int d = V.dim;
  const int m = int(std::ceil(V.radius * N)) + 1;
  // per-axis profile values at x = -m..m and axis correlation corr[z], z = 0..2m
  std::vector<double> prof(2 * m + 1);
  for (int x = -m; x <= m; ++x) prof[x + m] = bump01((double(x) / N) / V.radius);
  std::vector<double> corr(2 * m + 1, 0.0);
  for (int z = 0; z <= 2 * m; ++z) {
    double s = 0;
    for (int x = -m; x + z <= m; ++x) s += prof[x + m] * prof[x + z + m];
    corr[z] = s;
  }
  double amp2 = V.amplitude * V.amplitude;

  // sum over offsets z >= 0 with sign multiplicity 2^{#nonzero}
  const int zmax = 2 * m;
  std::array<int, kMaxDim> z{};
  double total = 0;
  for (;;) {
    double w = 1;
    int nz = 0;
    for (int i = 0; i < d; ++i) {
      w *= corr[z[i]];
      if (z[i] > 0) ++nz;
    }
    if (w != 0) {
      LatticePoint p;
      for (int i = 0; i < d; ++i) p.c[i] = z[i];
      double g = table.at(p);
      total += double(1 << nz) * w * g * g;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++z[i] <= zmax) break;
      z[i] = 0;
    }
    if (i == d) break;
  }
  return amp2 * total;  // the full double sum
}

}  // namespace

double variance_b_n_sum(const TestFunctionSpec& V, int N, const GreenTable& table) {
  const int d = table.dim();
  double double_sum;
  if (d == 3 && V.kind == TestFunctionSpec::Kind::RadialBump)
    double_sum = bn_sum3(V, N, table);
  else if (V.kind == TestFunctionSpec::Kind::SeparableBump && V.dim == d)
    double_sum = bn_sum_separable(V, N, table);
  else
    throw std::invalid_argument(
        "variance_b_n_sum: radial bump (d=3) or separable bump (d=dim) required");
  double bn;
  if (d == 3)
    bn = std::pow(double(N), 4);
  else if (d == 4)
    bn = std::pow(double(N), 4) * std::log(double(N));
  else
    bn = std::pow(double(N), d);
  return 2.0 * double_sum / bn;
}

double lattice_green_squared_sum(const GreenTable& table, double* tail_bound) {
  const int d = table.dim();
  const int R = table.range();
  std::array<int, kMaxDim> a{};
  double total = 0;
  // octant sum with sign multiplicity
  for (;;) {
    int nz = 0;
    LatticePoint p;
    for (int i = 0; i < d; ++i) {
      p.c[i] = a[i];
      if (a[i] > 0) ++nz;
    }
    double g = table.at(p);
    total += double(1 << nz) * g * g;
    int i = 0;
    for (; i < d; ++i) {
      if (++a[i] <= R) break;
      a[i] = 0;
    }
    if (i == d) break;
  }
  if (tail_bound) {
    // sum_{|x|_inf > R} g^2 <= integral comparison with g ~ d G:
    // d^2 c_d^2 S_{d-1} / ((d-4) (R-1)^{d-4}); crude but reported only
    double cd = continuum_green_constant(d);
    double sd = 2.0 * std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0);
    *tail_bound = d >= 5 ? d * d * cd * cd * sd / ((d - 4) * std::pow(R - 1.0, d - 4))
                         : std::numeric_limits<double>::infinity();
  }
  return total;
}

// ---------------------------------------------------------------------------
// det2 MGF

Det2MgfResult det2_mgf_oracle(const std::vector<Vec3>& grid,
                              const std::vector<double>& v_values, int N,
                              const KernelFn& kernel, double z, double alpha) {
  const int n = int(grid.size());
  if (int(v_values.size()) != n)
    throw std::invalid_argument("det2_mgf_oracle: V size mismatch");
  const double cell = 1.0 / (double(N) * N * N);

  Det2MgfResult res;
  // admissible bound from the exact row sums of the |V| kernel
  double norm = 0;
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < n; ++j) s += kernel(grid[i], grid[j]) * std::abs(v_values[j]) * cell;
    norm = std::max(norm, s);
  }
  res.z_max = norm > 0 ? 0.5 / norm : std::numeric_limits<double>::infinity();
  if (std::abs(z) > res.z_max)
    throw std::domain_error("det2_mgf_oracle: |z| beyond the admissible bound");
  if (z == 0) {
    res.value = 1;
    res.det2 = 1;
    res.exponent = 0;
    return res;
  }

  Eigen::MatrixXd K(n, n);
  double trace_m = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double m = kernel(grid[i], grid[j]) * v_values[j] * cell;
      K(i, j) = (i == j ? 1.0 : 0.0) - z * m;
      if (i == j) trace_m += m;
    }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  // log |det| and sign from the LU diagonal
  double logabs = 0;
  int sign = lu.permutationP().determinant();
  for (int i = 0; i < n; ++i) {
    double u = lu.matrixLU()(i, i);
    if (u < 0) sign = -sign;
    logabs += std::log(std::abs(u));
  }
  if (sign <= 0)
    throw std::domain_error("det2_mgf_oracle: non-positive determinant (outside domain)");
  res.det2 = std::exp(logabs + z * trace_m);  // det(K) e^{-tr(K - I)}

  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd f = lu.solve(rhs);
  double inner = 0;
  for (int i = 0; i < n; ++i) inner += v_values[i] * f[i];
  inner *= cell;
  res.exponent = alpha * z * inner;
  res.value = std::exp(res.exponent) / std::sqrt(res.det2);
  return res;
}

void kernel_hs_diagnostics(const std::vector<Vec3>& grid, int N, const KernelFn& k1,
                           const KernelFn& k2, double* hs_diff, double* hs_bound) {
  double diff = 0, bound = 0;
  const double scale = 1.0 / std::pow(double(N), 6);
  for (const auto& a : grid)
    for (const auto& b : grid) {
      double u = k1(a, b), v = k2(a, b);
      diff += (u - v) * (u - v);
      bound += u * u + v * v;
    }
  if (hs_diff) *hs_diff = diff * scale;
  if (hs_bound) *hs_bound = bound * scale;
}

KernelFn mollified_kernel(const Mollifier& moll) {
  return [&moll](const Vec3& a, const Vec3& b) { return moll.green((a - b).norm()); };
}

KernelFn lattice_kernel(const GreenTable& table, int N) {
  return [&table, N](const Vec3& a, const Vec3& b) {
    double y[3] = {a.x, a.y, a.z}, yp[3] = {b.x, b.y, b.z};
    return green_rescaled(y, yp, N, table);
  };
}

}  // namespace intlace
