#pragma once

#include <cstdint>
#include <vector>

#include "intlace/geom.hpp"
#include "intlace/rng.hpp"
#include "intlace/testfunc.hpp"

namespace intlace {

enum class CloudMode { Exact, Truncated };

struct BrownianCloudParams {
  double alpha = 0.5;   // intensity level
  double rho = 1.2;     // observation ball radius (paths start on its sphere)
  double delta = 0;     // Euler time step; 0 selects the default (rho/100)^2
  double R_escape = 0;  // 0 selects the default 4 rho
  CloudMode mode = CloudMode::Exact;
};

struct BrownianCloudResult {
  uint64_t trajectory_count = 0;
  std::vector<double> pairings;  // <L_alpha, V_k> accumulators, one per V
  // filled only when paths_out is passed: (path id, step, position)
  struct PathPoint {
    uint32_t path, step;
    Vec3 pos;
  };
};

// One Poisson cloud of forward Wiener paths from the uniform sphere law on
// |y| = rho (count ~ Poisson(alpha cap B(0,rho))), Euler steps of variance
// delta, occupation pairing sum delta V(X). Exact mode resamples the sphere
// re-entry point through the exterior Poisson kernel after leaving the
// escape ball; truncated mode kills the path there. paths_out, when given,
// collects the polylines for visualization dumps.
BrownianCloudResult sample_brownian_cloud(
    const BrownianCloudParams& p, const std::vector<TestFunctionSpec>& Vs, Rng& rng,
    std::vector<BrownianCloudResult::PathPoint>* paths_out = nullptr);

// P[no trajectory meets the r-thickened probe ball] estimated by the
// frequency of empty clouds; equals exp(-alpha cap(B(0, r_probe + r))).
double vacant_probe(double alpha, double probe_radius, double r, uint64_t n_clouds,
                    uint64_t seed);

// point uniform on the sphere |q| = rho
Vec3 uniform_sphere_point(double rho, Rng& rng);

// re-entry point of Brownian motion on the sphere |q| = rho conditioned on
// hitting it, started from x outside (exterior Poisson kernel), by rejection
Vec3 exterior_poisson_entry(const Vec3& x, double rho, Rng& rng);

}  // namespace intlace
