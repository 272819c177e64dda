#include "intlace/brownian.hpp"

#include <cmath>
#include <stdexcept>

#include "intlace/potential.hpp"

namespace intlace {

Vec3 uniform_sphere_point(double rho, Rng& rng) {
  for (;;) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    double n = v.norm();
    if (n > 1e-12) return v * (rho / n);
  }
}

Vec3 exterior_poisson_entry(const Vec3& x, double rho, Rng& rng) {
  // density wrt the uniform sphere law is proportional to |x - q|^{-3};
  // max at |x - q| = |x| - rho, so accept with ((|x|-rho)/|x-q|)^3
  const double nearest = x.norm() - rho;
  if (nearest <= 0)
    throw std::invalid_argument("exterior_poisson_entry: x must be outside the sphere");
  for (;;) {
    Vec3 q = uniform_sphere_point(rho, rng);
    double dist = (x - q).norm();
    double ratio = nearest / dist;
    if (rng.uniform() < ratio * ratio * ratio) return q;
  }
}

BrownianCloudResult sample_brownian_cloud(
    const BrownianCloudParams& p, const std::vector<TestFunctionSpec>& Vs, Rng& rng,
    std::vector<BrownianCloudResult::PathPoint>* paths_out) {
  if (p.alpha < 0) throw std::invalid_argument("sample_brownian_cloud: alpha >= 0");
  if (p.rho <= 0) throw std::invalid_argument("sample_brownian_cloud: rho > 0");
  const double delta = p.delta > 0 ? p.delta : (p.rho / 100) * (p.rho / 100);
  if (p.delta < 0) throw std::invalid_argument("sample_brownian_cloud: delta > 0");
  const double R = p.R_escape > 0 ? p.R_escape : 4 * p.rho;
  if (R <= p.rho)
    throw std::invalid_argument("sample_brownian_cloud: R_escape must exceed rho");
  for (const auto& V : Vs) {
    double reach = 0;
    for (int i = 0; i < 3; ++i) reach += V.center[i] * V.center[i];
    if (std::sqrt(reach) + V.radius > p.rho)
      throw std::invalid_argument(
          "sample_brownian_cloud: V support must sit inside the observation ball");
  }

  BrownianCloudResult out;
  out.pairings.assign(Vs.size(), 0.0);
  const double cap = capacity_ball_continuum(p.rho, 3);
  out.trajectory_count = rng.poisson(p.alpha * cap);
  const double sd = std::sqrt(delta);
  const double R2 = R * R;

  for (uint64_t t = 0; t < out.trajectory_count; ++t) {
    Vec3 pos = uniform_sphere_point(p.rho, rng);
    uint32_t step = 0;
    if (paths_out) paths_out->push_back({uint32_t(t), step, pos});
    for (;;) {
      pos.x += sd * rng.normal();
      pos.y += sd * rng.normal();
      pos.z += sd * rng.normal();
      ++step;
      if (paths_out) paths_out->push_back({uint32_t(t), step, pos});
      double n2 = pos.squaredNorm();
      if (n2 > R2) {
        if (p.mode == CloudMode::Truncated) break;
        double nrm = std::sqrt(n2);
        if (rng.uniform() >= p.rho / nrm) break;  // escapes for good
        pos = exterior_poisson_entry(pos, p.rho, rng);
        continue;
      }
      for (size_t k = 0; k < Vs.size(); ++k)
        out.pairings[k] += delta * Vs[k].eval3(pos);
    }
  }
  return out;
}

double vacant_probe(double alpha, double probe_radius, double r, uint64_t n_clouds,
                    uint64_t seed) {
  if (probe_radius <= 0 || r < 0)
    throw std::invalid_argument("vacant_probe: ball probe with positive radius required");
  const double cap = capacity_ball_continuum(probe_radius + r, 3);
  uint64_t empty = 0;
  for (uint64_t i = 0; i < n_clouds; ++i) {
    Rng rng(derive_seed(seed, 0x7ac, i));
    if (rng.poisson(alpha * cap) == 0) ++empty;
  }
  return double(empty) / double(n_clouds);
}

}  // namespace intlace
