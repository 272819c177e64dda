#include "intlace/fields.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace intlace {

CovarianceFactor::CovarianceFactor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    L_ = llt.matrixL();
    return;
  }
  // pivoted fallback for near-singular covariances (coarse eps vs spacing)
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("CovarianceFactor: factorization failed");
  Eigen::VectorXd D = ldlt.vectorD();
  double dmax = D.maxCoeff();
  for (int i = 0; i < D.size(); ++i) {
    if (D[i] < -1e-10 * dmax)
      throw std::runtime_error(
          "CovarianceFactor: covariance not positive semidefinite "
          "(increase eps relative to spacing)");
    D[i] = D[i] > 0 ? std::sqrt(D[i]) : 0.0;
  }
  Eigen::MatrixXd L = ldlt.matrixL();
  L_ = ldlt.transpositionsP().transpose() * (L * D.asDiagonal());
}

void CovarianceFactor::sample(Rng& rng, double* out) const {
  const int n = size();
  thread_local std::vector<double> z;
  z.resize(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  // lower-triangular multiply
  const double* L = L_.data();  // column-major
  for (int i = 0; i < n; ++i) out[i] = 0;
  for (int j = 0; j < n; ++j) {
    double zj = z[j];
    const double* col = L + size_t(j) * n;
    for (int i = j; i < n; ++i) out[i] += col[i] * zj;
  }
}

DiscreteGffSampler::DiscreteGffSampler(std::vector<LatticePoint> window,
                                       const GreenTable& table)
    : window_(std::move(window)),
      dim_(table.dim()),
      g0_(table.g0()),
      factor_([&] {
        const int n = int(window_.size());
        Eigen::MatrixXd cov(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j <= i; ++j) {
            double v = table.at(sub(window_[i], window_[j], table.dim()));
            cov(i, j) = v;
            cov(j, i) = v;
          }
        return cov;
      }()) {
  if (window_.empty()) throw std::invalid_argument("DiscreteGffSampler: empty window");
}

void DiscreteGffSampler::sample(Rng& rng, std::vector<double>& out) const {
  out.resize(window_.size());
  factor_.sample(rng, out.data());
}

MollifiedGffSampler::MollifiedGffSampler(std::vector<Vec3> grid, const Mollifier& moll)
    : grid_(std::move(grid)),
      var_(moll.green0()),
      factor_([&] {
        const int n = int(grid_.size());
        Eigen::MatrixXd cov(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j <= i; ++j) {
            double v = moll.green((grid_[i] - grid_[j]).norm());
            cov(i, j) = v;
            cov(j, i) = v;
          }
        return cov;
      }()) {
  if (grid_.empty()) throw std::invalid_argument("MollifiedGffSampler: empty grid");
}

void MollifiedGffSampler::sample(Rng& rng, std::vector<double>& out) const {
  out.resize(grid_.size());
  factor_.sample(rng, out.data());
}

std::vector<double> wick_square(const std::vector<double>& values, double variance_const) {
  std::vector<double> out(values.size());
  for (size_t i = 0; i < values.size(); ++i)
    out[i] = values[i] * values[i] - variance_const;
  return out;
}

std::vector<double> shifted_wick_square(const std::vector<double>& values,
                                        double variance_const, double shift) {
  if (shift < 0) throw std::invalid_argument("shifted_wick_square: shift >= 0 required");
  // same counter term as the plain Wick square: mean is shift^2 (= 2u), not 0
  std::vector<double> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    double v = values[i] + shift;
    out[i] = v * v - variance_const;
  }
  return out;
}

double pair_values_lattice(const std::vector<LatticePoint>& sites,
                           const std::vector<double>& values, const TestFunctionSpec& V,
                           int N) {
  if (sites.size() != values.size())
    throw std::invalid_argument("pair_values_lattice: size mismatch");
  double s = 0;
  double y[kMaxDim];
  for (size_t i = 0; i < sites.size(); ++i) {
    for (int k = 0; k < V.dim; ++k) y[k] = double(sites[i].c[k]) / N;
    s += V(y) * values[i];
  }
  return s / std::pow(double(N), V.dim);
}

double pair_values_grid(const std::vector<Vec3>& grid, const std::vector<double>& values,
                        const TestFunctionSpec& V, double spacing) {
  if (grid.size() != values.size())
    throw std::invalid_argument("pair_values_grid: size mismatch");
  double s = 0;
  for (size_t i = 0; i < grid.size(); ++i) s += V.eval3(grid[i]) * values[i];
  return s * spacing * spacing * spacing;
}

void require_support_covered(const std::vector<LatticePoint>& window,
                             const TestFunctionSpec& V, int N, int dim) {
  LatticeFunction f = V.restrict_to_lattice(N);
  struct Less {
    bool operator()(const LatticePoint& a, const LatticePoint& b) const {
      return a.c < b.c;
    }
  };
  std::set<LatticePoint, Less> in(window.begin(), window.end());
  (void)dim;
  for (const auto& s : f.sites)
    if (!in.count(s))
      throw std::invalid_argument(
          "test-function support extends beyond the sampled window");
}

}  // namespace intlace
