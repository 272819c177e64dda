#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace intlace {

// Lattice points carry up to 5 coordinates; dim tells how many are live.
// Fixed small capacity keeps site lists contiguous and cheap to copy.
inline constexpr int kMaxDim = 5;

struct LatticePoint {
  std::array<int, kMaxDim> c{};

  int& operator[](int i) { return c[i]; }
  int operator[](int i) const { return c[i]; }
  bool operator==(const LatticePoint&) const = default;
};

inline LatticePoint lp3(int x, int y, int z) {
  LatticePoint p;
  p.c = {x, y, z, 0, 0};
  return p;
}

inline LatticePoint add(const LatticePoint& a, const LatticePoint& b, int dim) {
  LatticePoint r;
  for (int i = 0; i < dim; ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}

inline LatticePoint sub(const LatticePoint& a, const LatticePoint& b, int dim) {
  LatticePoint r;
  for (int i = 0; i < dim; ++i) r.c[i] = a.c[i] - b.c[i];
  return r;
}

inline int norm_inf(const LatticePoint& p, int dim) {
  int m = 0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(p.c[i]));
  return m;
}

inline double norm2(const LatticePoint& p, int dim) {
  double s = 0;
  for (int i = 0; i < dim; ++i) s += double(p.c[i]) * p.c[i];
  return std::sqrt(s);
}

// Sorted absolute coordinates: the canonical representative of the
// hyperoctahedral orbit of p (sign flips + permutations).
inline std::array<int, kMaxDim> octant_canonical(const LatticePoint& p, int dim) {
  std::array<int, kMaxDim> a{};
  for (int i = 0; i < dim; ++i) a[i] = std::abs(p.c[i]);
  for (int i = 1; i < dim; ++i) {  // insertion sort, dim <= 5
    int v = a[i], j = i - 1;
    while (j >= 0 && a[j] > v) {
      a[j + 1] = a[j];
      --j;
    }
    a[j + 1] = v;
  }
  return a;
}

// Centered cube of lattice points, |x|_inf <= radius.
inline std::vector<LatticePoint> box_sites(int radius, int dim) {
  std::vector<LatticePoint> out;
  int side = 2 * radius + 1;
  long count = 1;
  for (int i = 0; i < dim; ++i) count *= side;
  out.reserve(count);
  LatticePoint p;
  for (int i = 0; i < dim; ++i) p.c[i] = -radius;
  for (long k = 0; k < count; ++k) {
    out.push_back(p);
    for (int i = 0; i < dim; ++i) {
      if (++p.c[i] <= radius) break;
      p.c[i] = -radius;
    }
  }
  return out;
}

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double squaredNorm() const { return x * x + y * y + z * z; }
};

}  // namespace intlace
