#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace intlace {

// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
struct GaussRule {
  std::vector<double> x, w;
};

inline const GaussRule& gauss_legendre(int n) {
  static std::vector<GaussRule> cache(65);
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order out of range");
  GaussRule& r = cache[n];
  if (!r.x.empty()) return r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1 - x * x) * pp * pp);
  }
  return r;
}

template <class F>
double gauss_panel(F&& f, double a, double b, int order) {
  const GaussRule& r = gauss_legendre(order);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a), s = 0;
  for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(mid + half * r.x[i]);
  return s * half;
}

namespace detail {
template <class F>
double adapt_simpson(F& f, double a, double m, double b, double fa, double fm, double fb,
                     double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6 * (fa + 4 * flm + fm);
  double right = (b - m) / 6 * (fm + 4 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return adapt_simpson(f, a, lm, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adapt_simpson(f, m, rm, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

// Adaptive Simpson on [a,b], absolute tolerance.
template <class F>
double integrate_1d(F&& f, double a, double b, double tol, int max_depth = 48) {
  if (a == b) return 0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return detail::adapt_simpson(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

// Adaptive tensor-product quadrature over an axis-aligned box in up to 5
// dims. Error estimate per cell is |GL5 - GL3|; worst cell split along its
// widest axis. Returns the integral; achieved_err reports the residual
// error-sum when the cell cap was hit.
class AdaptiveBox {
 public:
  using Func = std::function<double(const double*)>;

  static double integrate(const Func& f, int dim, const double* lo, const double* hi,
                          double tol, size_t max_cells, double* achieved_err = nullptr) {
    AdaptiveBox q(f, dim);
    Cell root;
    for (int i = 0; i < dim; ++i) {
      root.lo[i] = lo[i];
      root.hi[i] = hi[i];
    }
    q.eval(root);
    q.total_ = root.val;
    q.err_ = root.err;
    q.heap_.push(root);
    size_t cells = 1;
    while (q.err_ > tol && cells < max_cells && !q.heap_.empty()) {
      Cell c = q.heap_.top();
      q.heap_.pop();
      int axis = 0;
      double width = 0;
      for (int i = 0; i < dim; ++i)
        if (c.hi[i] - c.lo[i] > width) {
          width = c.hi[i] - c.lo[i];
          axis = i;
        }
      Cell a = c, b = c;
      double mid = 0.5 * (c.lo[axis] + c.hi[axis]);
      a.hi[axis] = mid;
      b.lo[axis] = mid;
      q.eval(a);
      q.eval(b);
      q.total_ += a.val + b.val - c.val;
      q.err_ += a.err + b.err - c.err;
      q.heap_.push(a);
      q.heap_.push(b);
      ++cells;
    }
    if (achieved_err) *achieved_err = q.err_;
    return q.total_;
  }

 private:
  struct Cell {
    double lo[5], hi[5];
    double val = 0, err = 0;
    bool operator<(const Cell& o) const { return err < o.err; }
  };

  AdaptiveBox(const Func& f, int dim) : f_(f), dim_(dim) {}

  double rule(const Cell& c, int order) const {
    const GaussRule& r = gauss_legendre(order);
    double pt[5], mid[5], half[5];
    double vol = 1;
    for (int i = 0; i < dim_; ++i) {
      mid[i] = 0.5 * (c.lo[i] + c.hi[i]);
      half[i] = 0.5 * (c.hi[i] - c.lo[i]);
      vol *= half[i];
    }
    int idx[5] = {0, 0, 0, 0, 0};
    double sum = 0;
    for (;;) {
      double w = 1;
      for (int i = 0; i < dim_; ++i) {
        pt[i] = mid[i] + half[i] * r.x[idx[i]];
        w *= r.w[idx[i]];
      }
      sum += w * f_(pt);
      int i = 0;
      for (; i < dim_; ++i) {
        if (++idx[i] < order) break;
        idx[i] = 0;
      }
      if (i == dim_) break;
    }
    return sum * vol;
  }

  void eval(Cell& c) const {
    double hi = rule(c, 5);
    double lo = rule(c, 3);
    c.val = hi;
    c.err = std::abs(hi - lo);
  }

  const Func& f_;
  int dim_;
  double total_ = 0, err_ = 0;
  std::priority_queue<Cell> heap_;
};

}  // namespace intlace
