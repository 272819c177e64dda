#include "intlace/green.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "intlace/quadrature.hpp"

namespace intlace {

namespace {

constexpr double kPi = std::numbers::pi;

double surface_area_unit_sphere(int dim) {  // S_{d-1}
  return 2.0 * std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0);
}

// theta^2 - 4 sin^2(theta/2), stable for small theta
double theta2_minus_2versine(double theta) {
  double t = theta * theta;
  if (std::abs(theta) < 0.5) {
    return t * t * (1.0 / 12 - t / 360 + t * t / 20160 - t * t * t / 1814400);
  }
  double s = std::sin(0.5 * theta);
  return t - 4.0 * s * s;
}

// Gaussian falloff of the subtracted singular part; e^{-beta pi^2} must be
// negligible so the compensator integral can be taken over all of R^d.
constexpr double kCompBeta = 4.0;

// 1/(1-lambda) - 2d e^{-beta |theta|^2} / |theta|^2, cancellation-free:
// split as [1/(1-lambda) - 2d/|theta|^2] + 2d (1 - e^{-beta|theta|^2})/|theta|^2.
double compensated_inverse_symbol(const double* th, int d) {
  double one_minus_lambda = 0, norm2 = 0;
  for (int i = 0; i < d; ++i) {
    double s = std::sin(0.5 * th[i]);
    one_minus_lambda += 2.0 * s * s;
    norm2 += th[i] * th[i];
  }
  one_minus_lambda /= d;
  if (norm2 == 0) return 0;  // measure-zero corner, any finite value works
  double num = 0;  // |theta|^2 - 2d(1-lambda), termwise
  for (int i = 0; i < d; ++i) num += theta2_minus_2versine(th[i]);
  double head = num / (one_minus_lambda * norm2);
  double smooth = -2.0 * d * std::expm1(-kCompBeta * norm2) / norm2;
  return head + smooth;
}

std::mutex g0_cache_mutex;
std::map<std::pair<int, long long>, double> g0_cache;

double g0_fourier(int dim, double tol) {
  long long tol_key = (long long)(std::log10(tol) * 1024);
  {
    std::lock_guard<std::mutex> lk(g0_cache_mutex);
    auto it = g0_cache.find({dim, tol_key});
    if (it != g0_cache.end()) return it->second;
  }
  AdaptiveBox::Func f = [dim](const double* th) {
    return compensated_inverse_symbol(th, dim);
  };
  double lo[5] = {0, 0, 0, 0, 0};
  double hi[5];
  for (int i = 0; i < dim; ++i) hi[i] = kPi;
  double scale = std::pow(2.0, dim) / std::pow(2 * kPi, dim);
  size_t max_cells = dim <= 3 ? 400000 : 120000;
  double err = 0;
  double integral =
      AdaptiveBox::integrate(f, dim, lo, hi, 0.45 * tol / scale, max_cells, &err);
  if (err * scale > 0.45 * tol)
    throw std::runtime_error("green_lattice: quadrature tolerance not reached (g0)");
  // int_{R^d} e^{-beta|theta|^2}/|theta|^2 dtheta = S_{d-1} Gamma((d-2)/2) / (2 beta^{(d-2)/2})
  double analytic = 2.0 * dim * surface_area_unit_sphere(dim) *
                    std::tgamma((dim - 2) / 2.0) /
                    (2.0 * std::pow(kCompBeta, (dim - 2) / 2.0));
  double g0 = scale * integral + analytic / std::pow(2 * kPi, dim);
  std::lock_guard<std::mutex> lk(g0_cache_mutex);
  g0_cache[{dim, tol_key}] = g0;
  return g0;
}

}  // namespace

double continuum_green_constant(int dim) {
  if (dim < 3) throw std::invalid_argument("continuum Green function needs d >= 3");
  return std::tgamma(dim / 2.0 - 1.0) / (2.0 * std::pow(kPi, dim / 2.0));
}

double green_continuum_r(double r, int dim) {
  if (r == 0) return std::numeric_limits<double>::infinity();
  return continuum_green_constant(dim) * std::pow(r, 2.0 - dim);
}

double green_continuum(const double* y, int dim) {
  double n2 = 0;
  for (int i = 0; i < dim; ++i) n2 += y[i] * y[i];
  return green_continuum_r(std::sqrt(n2), dim);
}

double green_lattice(const LatticePoint& x, int dim, double tol) {
  if (dim < 3)
    throw std::invalid_argument("green_lattice: d >= 3 required (walk recurrent below)");
  if (dim > kMaxDim) throw std::invalid_argument("green_lattice: d > 5 not supported");
  if (tol <= 0) throw std::invalid_argument("green_lattice: tol must be positive");

  double g0 = g0_fourier(dim, tol);
  auto a = octant_canonical(x, dim);
  bool origin = true;
  for (int i = 0; i < dim; ++i) origin = origin && a[i] == 0;
  if (origin) return g0;

  // g(x) = g(0) + (2pi)^-d int (prod_j cos(x_j theta_j) - 1) / (1 - lambda)
  AdaptiveBox::Func f = [&a, dim](const double* th) {
    double prod = 1, one_minus_lambda = 0;
    for (int i = 0; i < dim; ++i) {
      prod *= std::cos(a[i] * th[i]);
      double s = std::sin(0.5 * th[i]);
      one_minus_lambda += 2.0 * s * s;
    }
    one_minus_lambda /= dim;
    return (prod - 1.0) / one_minus_lambda;
  };
  double lo[5] = {0, 0, 0, 0, 0};
  double hi[5];
  for (int i = 0; i < dim; ++i) hi[i] = kPi;
  double scale = std::pow(2.0, dim) / std::pow(2 * kPi, dim);
  size_t max_cells = dim <= 3 ? 400000 : 120000;
  double err = 0;
  double integral =
      AdaptiveBox::integrate(f, dim, lo, hi, 0.45 * tol / scale, max_cells, &err);
  if (err * scale > 0.45 * tol)
    throw std::runtime_error("green_lattice: quadrature tolerance not reached");
  return g0 + scale * integral;
}

// ---------------------------------------------------------------------------
// scaled Bessel

void bessel_i_scaled(int nmax, double s, double* out) {
  if (s == 0) {
    out[0] = 1;
    for (int n = 1; n <= nmax; ++n) out[n] = 0;
    return;
  }
  if (s < 40.0) {
    // Miller downward recursion, normalized by I_0 + 2 sum I_k = e^s
    int start = nmax + 24 + int(1.8 * s);
    std::vector<double> v(start + 2, 0.0);
    v[start + 1] = 0;
    v[start] = 1e-280;
    for (int k = start; k >= 1; --k) {
      v[k - 1] = v[k + 1] + (2.0 * k / s) * v[k];
      if (v[k - 1] > 1e200) {
        for (int j = k - 1; j <= start + 1; ++j) v[j] *= 1e-200;
      }
    }
    double norm = v[0];
    for (int k = 1; k <= start; ++k) norm += 2.0 * v[k];
    for (int n = 0; n <= nmax; ++n) out[n] = v[n] / norm;
    return;
  }
  // e^{-s} I_n(s) = (1/pi) int_0^pi e^{-s(1-cos phi)} cos(n phi) dphi;
  // the integrand is negligible once s(1-cos phi) > 46.
  double phimax = (46.0 / s >= 2.0) ? kPi : std::acos(1.0 - 46.0 / s);
  int panels = std::max(2, int(std::ceil(nmax * phimax / 4.0)) + 1);
  const GaussRule& gr = gauss_legendre(16);
  for (int n = 0; n <= nmax; ++n) out[n] = 0;
  double h = phimax / panels;
  for (int p = 0; p < panels; ++p) {
    double a = p * h, mid = a + 0.5 * h, half = 0.5 * h;
    for (size_t q = 0; q < gr.x.size(); ++q) {
      double phi = mid + half * gr.x[q];
      double sh = std::sin(0.5 * phi);
      double w = gr.w[q] * half * std::exp(-2.0 * s * sh * sh);
      double c0 = 1.0, c1 = std::cos(phi);
      out[0] += w;
      if (nmax >= 1) out[1] += w * c1;
      double two_c = 2.0 * c1;
      for (int n = 2; n <= nmax; ++n) {
        double c2 = two_c * c1 - c0;
        c0 = c1;
        c1 = c2;
        out[n] += w * c2;
      }
    }
  }
  for (int n = 0; n <= nmax; ++n) out[n] /= kPi;
}

// ---------------------------------------------------------------------------
// GreenTable

namespace {

struct SNode {
  double s, w;
};

std::vector<SNode> table_quad_nodes(double T) {
  std::vector<SNode> nodes;
  const GaussRule& g32 = gauss_legendre(32);
  for (size_t i = 0; i < g32.x.size(); ++i)
    nodes.push_back({0.5 + 0.5 * g32.x[i], 0.5 * g32.w[i]});
  // log-spaced panels on [1, T]
  const GaussRule& g24 = gauss_legendre(24);
  double vmax = std::log(T);
  int panels = int(std::ceil(vmax / 0.5));
  double hv = vmax / panels;
  for (int p = 0; p < panels; ++p) {
    double mid = (p + 0.5) * hv, half = 0.5 * hv;
    for (size_t i = 0; i < g24.x.size(); ++i) {
      double v = mid + half * g24.x[i];
      double s = std::exp(v);
      nodes.push_back({s, g24.w[i] * half * s});
    }
  }
  return nodes;
}

// int_T^inf of (2 pi s)^{-d/2} (1 - A/s + B/s^2 - C/s^3) ds
double tail_integral(int dim, double T, double A, double B, double C) {
  double p = dim / 2.0;
  double t1 = std::pow(T, 1 - p) / (p - 1);
  double t2 = std::pow(T, -p) / p;
  double t3 = std::pow(T, -p - 1) / (p + 1);
  double t4 = std::pow(T, -p - 2) / (p + 2);
  return std::pow(2 * kPi, -p) * (t1 - A * t2 + B * t3 - C * t4);
}

uint64_t fnv1a(const unsigned char* data, size_t n, uint64_t h = 1469598103934665603ULL) {
  for (size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

GreenTable::GreenTable(int dim, int range, double tol) : dim_(dim), range_(range), tol_(tol) {
  if (dim < 3 || dim > kMaxDim)
    throw std::invalid_argument("GreenTable: dim must be in [3,5]");
  if (range < 1) throw std::invalid_argument("GreenTable: range >= 1 required");

  const int nmax = range;
  const double T = std::max(2.0e5, 60.0 * double(nmax) * double(nmax));
  auto nodes = table_quad_nodes(T);
  const size_t K = nodes.size();

  // scaled Bessel values on the shared grid: bess[k][n]
  std::vector<double> bess(K * (nmax + 1));
  for (size_t k = 0; k < K; ++k) bessel_i_scaled(nmax, nodes[k].s, &bess[k * (nmax + 1)]);

  // asymptotic coefficients a1, a2, a3 per order
  std::vector<double> a1(nmax + 1), a2(nmax + 1), a3(nmax + 1);
  for (int n = 0; n <= nmax; ++n) {
    double mu = 4.0 * n * n;
    a1[n] = (mu - 1) / 8.0;
    a2[n] = (mu - 1) * (mu - 9) / 128.0;
    a3[n] = (mu - 1) * (mu - 9) * (mu - 25) / 3072.0;
  }

  size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= size_t(range + 1);
  values_.assign(total, 0.0);

  // iterate over nondecreasing tuples, scatter to coordinate permutations
  std::array<int, kMaxDim> t{};
  std::vector<double> prod(K);
  for (;;) {
    for (size_t k = 0; k < K; ++k) {
      double p = 1;
      for (int i = 0; i < dim; ++i) p *= bess[k * (nmax + 1) + t[i]];
      prod[k] = p;
    }
    double num = 0;
    for (size_t k = 0; k < K; ++k) num += nodes[k].w * prod[k];
    double A = 0, B = 0, C = 0;
    {
      double sa1 = 0, sa2 = 0, sa3 = 0;
      for (int i = 0; i < dim; ++i) {
        sa1 += a1[t[i]];
        sa2 += a2[t[i]];
        sa3 += a3[t[i]];
      }
      double cross2 = 0, cross3 = 0, mix12 = 0;
      for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) cross2 += a1[t[i]] * a1[t[j]];
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          if (i != j) mix12 += a1[t[i]] * a2[t[j]];
      for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
          for (int k2 = j + 1; k2 < dim; ++k2) cross3 += a1[t[i]] * a1[t[j]] * a1[t[k2]];
      A = sa1;
      B = sa2 + cross2;
      C = sa3 + mix12 + cross3;
    }
    double val = dim * (num + tail_integral(dim, T, A, B, C));

    // write to every distinct permutation of t
    std::array<int, kMaxDim> perm = t;
    std::sort(perm.begin(), perm.begin() + dim);
    do {
      size_t idx = 0;
      for (int i = 0; i < dim; ++i) idx = idx * (range + 1) + perm[i];
      values_[idx] = val;
    } while (std::next_permutation(perm.begin(), perm.begin() + dim));

    // next nondecreasing tuple
    int i = dim - 1;
    for (; i >= 0; --i) {
      if (t[i] < range) {
        ++t[i];
        for (int j = i + 1; j < dim; ++j) t[j] = t[i];
        break;
      }
    }
    if (i < 0) break;
  }
}

double GreenTable::at(const LatticePoint& x) const {
  int a[kMaxDim];
  int m = 0;
  for (int i = 0; i < dim_; ++i) {
    a[i] = std::abs(x.c[i]);
    m = std::max(m, a[i]);
  }
  if (m <= range_) return at_abs_unchecked(a);
  if (!tail_mode) throw std::out_of_range("GreenTable: |x| beyond range, tail disabled");
  double n2 = 0;
  for (int i = 0; i < dim_; ++i) n2 += double(a[i]) * a[i];
  return dim_ * green_continuum_r(std::sqrt(n2), dim_);
}

void GreenTable::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("GreenTable::save: cannot open " + path);
  const char magic[8] = {'I', 'N', 'T', 'L', 'G', 'R', 'T', 'B'};
  uint32_t version = 1, d = dim_, r = range_;
  uint64_t count = values_.size();
  f.write(magic, 8);
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&d), 4);
  f.write(reinterpret_cast<const char*>(&r), 4);
  f.write(reinterpret_cast<const char*>(&tol_), 8);
  f.write(reinterpret_cast<const char*>(&count), 8);
  f.write(reinterpret_cast<const char*>(values_.data()), count * 8);
  uint64_t sum = fnv1a(reinterpret_cast<const unsigned char*>(values_.data()), count * 8);
  f.write(reinterpret_cast<const char*>(&sum), 8);
  if (!f) throw std::runtime_error("GreenTable::save: write failed");
}

GreenTable GreenTable::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("GreenTable::load: cannot open " + path);
  char magic[8];
  uint32_t version, d, r;
  double tol;
  uint64_t count;
  f.read(magic, 8);
  if (std::memcmp(magic, "INTLGRTB", 8) != 0)
    throw std::runtime_error("GreenTable::load: bad magic");
  f.read(reinterpret_cast<char*>(&version), 4);
  if (version != 1) throw std::runtime_error("GreenTable::load: unsupported version");
  f.read(reinterpret_cast<char*>(&d), 4);
  f.read(reinterpret_cast<char*>(&r), 4);
  f.read(reinterpret_cast<char*>(&tol), 8);
  f.read(reinterpret_cast<char*>(&count), 8);
  GreenTable t;
  t.dim_ = d;
  t.range_ = r;
  t.tol_ = tol;
  t.values_.resize(count);
  f.read(reinterpret_cast<char*>(t.values_.data()), count * 8);
  uint64_t sum_file, sum;
  f.read(reinterpret_cast<char*>(&sum_file), 8);
  if (!f) throw std::runtime_error("GreenTable::load: truncated file");
  sum = fnv1a(reinterpret_cast<const unsigned char*>(t.values_.data()), count * 8);
  if (sum != sum_file) throw std::runtime_error("GreenTable::load: checksum mismatch");
  return t;
}

GreenTable GreenTable::load_or_build(const std::string& cache_dir, int dim, int range,
                                     double tol) {
  char name[128];
  std::snprintf(name, sizeof(name), "green_d%d_r%d_tol%.3e.bin", dim, range, tol);
  std::filesystem::path p = std::filesystem::path(cache_dir) / name;
  if (std::filesystem::exists(p)) {
    GreenTable t = load(p.string());
    if (t.dim() == dim && t.range() == range && t.tol() == tol) return t;
  }
  GreenTable t(dim, range, tol);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (!ec) t.save(p.string());
  return t;
}

double green_rescaled_offset(const LatticePoint& x, int N, const GreenTable& table) {
  return std::pow(double(N), table.dim() - 2) / table.dim() * table.at(x);
}

double green_rescaled(const double* y, const double* yp, int N, const GreenTable& table) {
  LatticePoint x;
  for (int i = 0; i < table.dim(); ++i) {
    double v = (y[i] - yp[i]) * N;
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9)
      throw std::invalid_argument("green_rescaled: arguments not on the lattice (1/N)Z^d");
    x.c[i] = int(r);
  }
  return green_rescaled_offset(x, N, table);
}

}  // namespace intlace
