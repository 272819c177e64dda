#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace intlace {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent seed for (master, stream, index). Used so that
// sample i of a run depends only on these three values, never on worker
// scheduling.
inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index) {
  uint64_t s = master ^ (0x2545f4914f6cdd1dULL * (stream + 1));
  uint64_t a = splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (index + 1);
  uint64_t b = splitmix64(s);
  return a ^ (b + 0x632be59bd9b4e019ULL);
}

namespace detail {
// Marsaglia-Tsang ziggurat tables for the standard normal, 128 layers.
struct ZigguratTables {
  uint32_t kn[128];
  double wn[128], fn[128];
  static constexpr double kR = 3.442619855899;

  ZigguratTables() {
    const double m1 = 2147483648.0;
    const double vn = 9.91256303526217e-3;
    double dn = kR, tn = kR;
    double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = uint32_t((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = uint32_t((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables t;
  return t;
}
}  // namespace detail

// xoshiro256++ with self-contained distributions, so streams are stable
// across standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed = 1) { reseed(seed); }

  void reseed(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform on (0,1]
  double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // uniform on [0,1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double exponential() { return -std::log(uniform_pos()); }

  double normal() {
    const auto& z = detail::ziggurat();
    for (;;) {
      uint64_t u = next_u64();
      int32_t hz = int32_t(uint32_t(u >> 32));
      uint32_t iz = uint32_t(u) & 127;
      if (uint32_t(std::abs(hz)) < z.kn[iz]) return hz * z.wn[iz];
      if (iz == 0) {  // tail beyond R
        double x, y;
        do {
          x = -std::log(uniform_pos()) / detail::ZigguratTables::kR;
          y = -std::log(uniform_pos());
        } while (y + y < x * x);
        return hz > 0 ? detail::ZigguratTables::kR + x
                      : -(detail::ZigguratTables::kR + x);
      }
      double x = hz * z.wn[iz];
      if (z.fn[iz] + uniform() * (z.fn[iz - 1] - z.fn[iz]) < std::exp(-0.5 * x * x))
        return x;
    }
  }

  // unbiased integer in [0, n)
  uint64_t bounded(uint64_t n) {
    uint64_t threshold = (-n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Poisson draw: inversion below mean 30, PTRS transformed rejection above.
  uint64_t poisson(double mean) {
    if (mean <= 0) return 0;
    if (mean < 30.0) {
      double p = std::exp(-mean), f = p, u = uniform();
      uint64_t k = 0;
      while (u > f) {
        ++k;
        p *= mean / double(k);
        f += p;
        if (k > 2000) break;  // p underflow guard; unreachable for mean < 30
      }
      return k;
    }
    return poisson_ptrs(mean);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  // Hormann's PTRS rejection sampler.
  uint64_t poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      double u = uniform() - 0.5;
      double v = uniform_pos();
      double us = 0.5 - std::abs(u);
      double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (kf < 0) continue;
      if (us >= 0.07 && v <= vr) return uint64_t(kf);
      if (us < 0.013 && v > us) continue;
      double lhs = std::log(v * invalpha / (a / (us * us) + b));
      double rhs = -mean + kf * loglam - std::lgamma(kf + 1.0);
      if (lhs <= rhs) return uint64_t(kf);
    }
  }

  uint64_t s_[4] = {};
};

// Samples an index from a normalized cdf (last entry ~ 1) by bisection.
inline size_t sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  double u = rng.uniform() * cdf.back();
  size_t lo = 0, hi = cdf.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (cdf[mid] <= u)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace intlace
