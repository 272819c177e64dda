#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "intlace/fields.hpp"
#include "intlace/oracles.hpp"
#include "intlace/stats.hpp"
#include "intlace/testfunc.hpp"

using namespace intlace;

namespace {
const GreenTable& table3() {
  static GreenTable t(3, 40, 1e-10);
  return t;
}
TestFunctionSpec default_bump() {
  TestFunctionSpec V;
  V.amplitude = 0.1;
  V.radius = 1.0;
  return V;
}
}  // namespace

TEST_CASE("continuum functionals of the radial bump") {
  TestFunctionSpec V = default_bump();
  // int V via an independent cartesian Riemann sum
  double h = 0.02, riemann = 0, riemann2 = 0;
  for (double x = -1; x <= 1; x += h)
    for (double y = -1; y <= 1; y += h)
      for (double z = -1; z <= 1; z += h) {
        double p[3] = {x + h / 2, y + h / 2, z + h / 2};
        double v = V(p);
        riemann += v * h * h * h;
        riemann2 += v * v * h * h * h;
      }
  CHECK(integral_V(V) == doctest::Approx(riemann).epsilon(1e-3));
  CHECK(integral_V2(V) == doctest::Approx(riemann2).epsilon(1e-3));
  // autocorrelation endpoints
  CHECK(autocorrelation(V, 0.0) == doctest::Approx(integral_V2(V)).epsilon(1e-8));
  CHECK(autocorrelation(V, 2.0) == 0.0);
  // concentric cross-correlation formula reduces to <V,GV>
  TestFunctionSpec W = V;
  CHECK(fGh_continuum(V, W) == doctest::Approx(vGv_continuum(V)).epsilon(1e-6));
}

TEST_CASE("lattice Laplace exponent: trivial, 1x1, derivative, Neumann") {
  LatticeFunction V0;
  auto r0 = lattice_laplace_exponent(V0, 2, 0.7, table3());
  CHECK(r0.value == 0.0);
  CHECK(r0.domain_ok);

  // single site closed form
  double eps = 0.2, u = 0.5;
  int N = 2;
  LatticeFunction V1;
  V1.sites = {lp3(0, 0, 0)};
  V1.values = {eps};
  auto r1 = lattice_laplace_exponent(V1, N, u, table3());
  double cell = 1.0 / (3.0 * N * N);
  double inner = eps / (1 - eps * table3().g0() * cell) / std::pow(double(N), 3);
  CHECK(r1.value == doctest::Approx(u / 3.0 * N * inner).epsilon(1e-12));

  // derivative at z = 0 equals the mean u sum V / (d N^2)
  TestFunctionSpec V = default_bump();
  LatticeFunction Vf = V.restrict_to_lattice(N);
  double zh = 1e-5;
  LatticeFunction Vp = Vf, Vm = Vf;
  for (auto& v : Vp.values) v *= zh;
  for (auto& v : Vm.values) v *= -zh;
  double d0 = (lattice_laplace_exponent(Vp, N, u, table3()).value -
               lattice_laplace_exponent(Vm, N, u, table3()).value) /
              (2 * zh);
  double mean = 0;
  for (double v : Vf.values) mean += v;
  mean *= u * cell;
  CHECK(d0 == doctest::Approx(mean).epsilon(1e-7));

  // agreement with a 30-term Neumann series when the norm is moderate
  LatticeFunction Vn;
  for (const auto& x : box_sites(1, 3)) {
    Vn.sites.push_back(x);
    Vn.values.push_back(0.12);
  }
  double nrm = green_operator_norm(Vn, 1, table3());
  REQUIRE(nrm < 0.5);
  auto rl = lattice_laplace_exponent(Vn, 1, u, table3());
  double series = 0;
  for (int n = 1; n <= 30; ++n)
    series += lattice_v_gnv_power(Vn, 1, table3(), n - 1);
  series *= u / 3.0;
  CHECK(rl.value == doctest::Approx(series).epsilon(1e-8));

  // domain flag trips when the norm reaches 1
  LatticeFunction Vbig = Vn;
  for (auto& v : Vbig.values) v = 10.0;
  auto rb = lattice_laplace_exponent(Vbig, 1, u, table3());
  CHECK_FALSE(rb.domain_ok);
}

TEST_CASE("continuum Laplace exponent: linearity, series, refinement, radial route") {
  TestFunctionSpec V = default_bump();
  double alpha = 0.5, h = 1.0 / 8;
  ContinuumLaplaceResult r1 = continuum_laplace_exponent(V, alpha, h);
  REQUIRE(r1.domain_ok);
  ContinuumLaplaceResult r2 = continuum_laplace_exponent(V, 2 * alpha, h, false);
  CHECK(r2.value == doctest::Approx(2 * r1.value).epsilon(1e-12));  // alpha linearity
  CHECK(r1.refinement_delta < 0.005 * std::abs(r1.value));

  // z-expansion coefficients against independent quadrature, n = 1, 2
  double zh = 1e-3;
  TestFunctionSpec Vp = V, Vm = V;
  Vp.amplitude *= zh;
  Vm.amplitude *= -zh;
  double vp = continuum_laplace_exponent(Vp, alpha, h, false).value;
  double vm = continuum_laplace_exponent(Vm, alpha, h, false).value;
  double c1 = (vp - vm) / (2 * zh);             // alpha <V, 1>
  double c2 = (vp + vm) / (zh * zh);            // 2 alpha <V, G V>
  CHECK(c1 == doctest::Approx(alpha * integral_V(V)).epsilon(2e-3));
  CHECK(c2 == doctest::Approx(2 * alpha * vGv_continuum(V)).epsilon(2e-2));

  // independent radial Nystrom route
  double radial = continuum_laplace_exponent_radial(V, alpha);
  CHECK(r1.value == doctest::Approx(radial).epsilon(5e-3));
}

TEST_CASE("b_N variance sums: d=3 ladder and d=5 constant") {
  TestFunctionSpec V = default_bump();
  double target = 18.0 * vG2v_continuum(V);
  double prev = 1e18;
  for (int N : {4, 8, 16}) {
    double v = variance_b_n_sum(V, N, table3());
    double err = std::abs(v - target);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev / target < 0.05);

  GreenTable t5(5, 10, 1e-10);
  TestFunctionSpec V5;
  V5.kind = TestFunctionSpec::Kind::SeparableBump;
  V5.dim = 5;
  V5.amplitude = 0.1;
  V5.radius = 1.0;
  double tail = 0;
  double gsq = lattice_green_squared_sum(t5, &tail);
  CHECK(tail < 0.05 * gsq);
  double v5 = variance_b_n_sum(V5, 8, t5);
  CHECK(v5 == doctest::Approx(2.0 * gsq * integral_V2(V5)).epsilon(0.12));
}

TEST_CASE("det2 oracle: exact at z=0, variance via second derivative, domain") {
  int N = 6;
  Mollifier moll(0.25);
  KernelFn kern = mollified_kernel(moll);
  TestFunctionSpec V = default_bump();
  V.radius = 0.45;
  std::vector<Vec3> grid;
  std::vector<double> vvals;
  for (int i = -N / 2; i < N / 2; ++i)
    for (int j = -N / 2; j < N / 2; ++j)
      for (int k = -N / 2; k < N / 2; ++k) {
        Vec3 y{double(i) / N, double(j) / N, double(k) / N};
        grid.push_back(y);
        vvals.push_back(V.eval3(y));
      }
  Det2MgfResult r0 = det2_mgf_oracle(grid, vvals, N, kern, 0.0, 0.0);
  CHECK(r0.value == 1.0);
  CHECK(r0.det2 == 1.0);

  // alpha = 0: d^2/dz^2 log E at 0 equals Var((1/(2N^3)) sum V :Phi^2:)
  double zh = r0.z_max * 1e-3;
  auto logmgf = [&](double z) {
    return std::log(det2_mgf_oracle(grid, vvals, N, kern, z, 0.0).value);
  };
  double second = (logmgf(zh) - 2 * logmgf(0.0) + logmgf(-zh)) / (zh * zh);
  const double cell = 1.0 / (double(N) * N * N);
  double direct = 0;
  for (size_t i = 0; i < grid.size(); ++i)
    for (size_t j = 0; j < grid.size(); ++j) {
      double g = moll.green((grid[i] - grid[j]).norm());
      direct += vvals[i] * g * g * vvals[j];
    }
  direct *= 0.5 * cell * cell;  // Var(S) = (1/2) N^{-6} sum V G^2 V
  CHECK(second == doctest::Approx(direct).epsilon(1e-4));

  // exponent is linear in alpha
  Det2MgfResult ra = det2_mgf_oracle(grid, vvals, N, kern, 0.3 * r0.z_max, 0.5);
  Det2MgfResult rb = det2_mgf_oracle(grid, vvals, N, kern, 0.3 * r0.z_max, 1.0);
  CHECK(rb.exponent == doctest::Approx(2 * ra.exponent).epsilon(1e-12));
  CHECK(ra.det2 == doctest::Approx(rb.det2).epsilon(1e-12));

  CHECK_THROWS_AS(det2_mgf_oracle(grid, vvals, N, kern, 2 * r0.z_max, 0.5),
                  std::domain_error);
}

TEST_CASE("lattice-kind det2 oracle matches sampled scaled fields") {
  // field phi_{y,N} = sqrt(N/3) phi_{Ny} on an N^3 grid in [-1/2,1/2)^3 has
  // covariance g_N(y - y'); the functional S = (1/(2N^3)) sum V :(phi+s)^2:
  // must reproduce the lattice-kernel determinant MGF
  const int N = 6;
  const double alpha = 0.5;
  TestFunctionSpec V;
  V.amplitude = 0.1;
  V.radius = 0.45;
  std::vector<Vec3> grid;
  std::vector<double> vvals;
  std::vector<LatticePoint> window;
  for (int i = -N / 2; i < N / 2; ++i)
    for (int j = -N / 2; j < N / 2; ++j)
      for (int k = -N / 2; k < N / 2; ++k) {
        grid.push_back(Vec3{double(i) / N, double(j) / N, double(k) / N});
        vvals.push_back(V.eval3(grid.back()));
        window.push_back(lp3(i, j, k));
      }
  KernelFn kern = lattice_kernel(table3(), N);
  Det2MgfResult probe = det2_mgf_oracle(grid, vvals, N, kern, 0.0, alpha);
  double z = 0.4 * probe.z_max;
  Det2MgfResult oracle = det2_mgf_oracle(grid, vvals, N, kern, z, alpha);

  DiscreteGffSampler gff(window, table3());
  const double scale = std::sqrt(double(N) / 3.0);
  const double varc = scale * scale * table3().g0();  // g_N(0)
  const double shift = std::sqrt(2 * alpha);
  const double cell = 1.0 / (double(N) * N * N);
  const size_t n = 30000;
  std::vector<double> vals(n);
  std::vector<double> phi;
  for (size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(4242, 9, i));
    gff.sample(rng, phi);
    double s = 0;
    for (size_t k = 0; k < phi.size(); ++k) {
      double w = scale * phi[k] + shift;
      s += vvals[k] * (w * w - varc);
    }
    vals[i] = 0.5 * cell * s;
  }
  std::vector<double> zs{z};
  MomentReport mr = empirical_mgf(vals, zs);
  CHECK(std::abs(mr.mgf[0].value - oracle.value) < 4 * mr.mgf[0].se);
}

TEST_CASE("mollified and lattice kernels converge on the det2 scale") {
  // eps(N) = N^{-1/4}; Hilbert-Schmidt diagnostics bounded / decaying, and
  // the two MGF oracles approach each other as N grows
  TestFunctionSpec V = default_bump();
  V.radius = 0.45;
  double z = 0.05, alpha = 0.5;
  double prev_gap = 1e18, prev_hs = 1e18;
  for (int N : {4, 6, 8}) {
    Mollifier moll(std::pow(double(N), -0.25));
    std::vector<Vec3> grid;
    std::vector<double> vvals;
    for (int i = -N / 2; i < N / 2; ++i)
      for (int j = -N / 2; j < N / 2; ++j)
        for (int k = -N / 2; k < N / 2; ++k) {
          Vec3 y{double(i) / N, double(j) / N, double(k) / N};
          grid.push_back(y);
          vvals.push_back(V.eval3(y));
        }
    KernelFn km = mollified_kernel(moll);
    KernelFn kl = lattice_kernel(table3(), N);
    double hs_diff = 0, hs_bound = 0;
    kernel_hs_diagnostics(grid, N, km, kl, &hs_diff, &hs_bound);
    CHECK(hs_bound < 50.0);
    CHECK(hs_diff < prev_hs);
    prev_hs = hs_diff;
    double gap = std::abs(det2_mgf_oracle(grid, vvals, N, km, z, alpha).value -
                          det2_mgf_oracle(grid, vvals, N, kl, z, alpha).value);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}
