#include "intlace/rw_interlacements.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "intlace/fields.hpp"

namespace intlace {

namespace {

struct Less {
  bool operator()(const LatticePoint& a, const LatticePoint& b) const { return a.c < b.c; }
};

// apply the group element (perm, signs): out_k = signs_k * v[perm_k]
// encoded per dim<=5: perm code indexes a permutation list
const int kPerm3[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

}  // namespace

InterlacementSampler::InterlacementSampler(std::vector<LatticePoint> window,
                                           const GreenTable& table, int R_escape,
                                           WalkMode mode)
    : window_(std::move(window)), dim_(table.dim()), R_(R_escape), mode_(mode),
      table_(&table) {
  if (window_.empty()) throw std::invalid_argument("InterlacementSampler: empty window");
  if (dim_ != 3)
    throw std::invalid_argument("InterlacementSampler: walks implemented for d = 3");
  int wrad = 0;
  for (const auto& s : window_) wrad = std::max(wrad, norm_inf(s, dim_));
  if (R_ <= wrad)
    throw std::invalid_argument(
        "InterlacementSampler: R_escape must exceed the window radius");

  eq_ = equilibrium_measure_lattice(window_, table);
  start_cdf_.resize(window_.size());
  double acc = 0;
  for (size_t i = 0; i < window_.size(); ++i) {
    acc += eq_.weights[int(i)];
    start_cdf_[i] = acc;
  }

  // dense membership cube over the bounding box
  for (int i = 0; i < dim_; ++i) {
    wlo_[i] = window_[0].c[i];
    whi_[i] = window_[0].c[i];
  }
  for (const auto& s : window_)
    for (int i = 0; i < dim_; ++i) {
      wlo_[i] = std::min(wlo_[i], s.c[i]);
      whi_[i] = std::max(whi_[i], s.c[i]);
    }
  size_t vol = 1;
  for (int i = 0; i < dim_; ++i) vol *= size_t(whi_[i] - wlo_[i] + 1);
  windex_.assign(vol, -1);
  for (size_t i = 0; i < window_.size(); ++i) {
    size_t idx = 0;
    for (int k = 0; k < dim_; ++k)
      idx = idx * size_t(whi_[k] - wlo_[k] + 1) + size_t(window_[i].c[k] - wlo_[k]);
    windex_[idx] = int32_t(i);
  }

  // shell kernels for exact-mode resampling; masses alone for the truncated
  // bias bound
  const int S = R_ + 1, sside = 2 * S + 1;
  std::vector<LatticePoint> shell_sites;
  shell_cube_.assign(size_t(sside) * sside * sside, -1);
  for (int x = -S; x <= S; ++x)
    for (int y = -S; y <= S; ++y)
      for (int z = -S; z <= S; ++z)
        if (std::max({std::abs(x), std::abs(y), std::abs(z)}) == S) {
          size_t cube = (size_t(x + S) * sside + size_t(y + S)) * sside + size_t(z + S);
          shell_cube_[cube] = int32_t(shell_sites.size());
          shell_sites.push_back(lp3(x, y, z));
        }

  const bool sym = window_symmetric();
  shell_.resize(shell_sites.size());
  std::map<std::array<int, kMaxDim>, int> rep_of;
  for (size_t si = 0; si < shell_sites.size(); ++si) {
    const LatticePoint& x = shell_sites[si];
    ShellEntry e;
    if (sym) {
      auto canon = octant_canonical(x, dim_);
      auto it = rep_of.find(canon);
      if (it == rep_of.end()) {
        it = rep_of.emplace(canon, int(reps_.size())).first;
        reps_.emplace_back();
      }
      e.rep = it->second;
      // find the group element with g(x) = canon: perm sorting |x|, then signs
      int order[3] = {0, 1, 2};
      std::stable_sort(order, order + 3,
                       [&](int i, int j) { return std::abs(x.c[i]) < std::abs(x.c[j]); });
      for (int pc = 0; pc < 6; ++pc)
        if (kPerm3[pc][0] == order[0] && kPerm3[pc][1] == order[1] &&
            kPerm3[pc][2] == order[2]) {
          e.perm = uint8_t(pc);
          break;
        }
      uint8_t signs = 0;
      for (int k = 0; k < 3; ++k)
        if (x.c[k] < 0) signs |= uint8_t(1 << k);
      e.signs = signs;
    } else {
      e.rep = int(reps_.size());
      reps_.emplace_back();
      e.perm = 0;
      e.signs = 0;
    }
    shell_[si] = e;
  }

  // kernel per representative: in exact mode a full hitting kernel, in
  // truncated mode only the return mass (for the bias bound)
  std::vector<LatticePoint> rep_site(reps_.size());
  if (sym) {
    for (size_t si = 0; si < shell_sites.size(); ++si) {
      auto canon = octant_canonical(shell_sites[si], dim_);
      LatticePoint p;
      for (int k = 0; k < dim_; ++k) p.c[k] = canon[k];
      rep_site[shell_[si].rep] = p;
    }
  } else {
    for (size_t si = 0; si < shell_sites.size(); ++si)
      rep_site[shell_[si].rep] = shell_sites[si];
  }
  for (size_t r = 0; r < reps_.size(); ++r) {
    if (mode_ == WalkMode::Exact) {
      Eigen::VectorXd h = hitting_kernel(rep_site[r], eq_, table);
      double acc2 = 0;
      reps_[r].cdf.resize(window_.size());
      for (size_t i = 0; i < window_.size(); ++i) {
        acc2 += h[int(i)];
        reps_[r].cdf[i] = acc2;
      }
      reps_[r].mass = acc2;
    } else {
      reps_[r].mass = hitting_mass(rep_site[r], eq_, table);
    }
    max_return_mass_ = std::max(max_return_mass_, reps_[r].mass);
  }
}

bool InterlacementSampler::window_symmetric() const {
  std::set<LatticePoint, Less> in(window_.begin(), window_.end());
  for (const auto& s : window_) {
    // orbit check: all sign flips of all permutations
    for (int pc = 0; pc < 6; ++pc)
      for (int sg = 0; sg < 8; ++sg) {
        LatticePoint q;
        for (int k = 0; k < 3; ++k) {
          int v = s.c[kPerm3[pc][k]];
          q.c[k] = (sg >> k) & 1 ? -v : v;
        }
        if (!in.count(q)) return false;
      }
  }
  return true;
}

size_t InterlacementSampler::shell_index(const LatticePoint& x) const {
  const int S = R_ + 1, side = 2 * S + 1;
  size_t cube =
      (size_t(x.c[0] + S) * side + size_t(x.c[1] + S)) * side + size_t(x.c[2] + S);
  return size_t(shell_cube_[cube]);
}

void InterlacementSampler::run_trajectory(Rng& rng, std::vector<double>& times) const {
  LatticePoint x = window_[sample_cdf(start_cdf_, rng)];
  const int side[3] = {whi_[0] - wlo_[0] + 1, whi_[1] - wlo_[1] + 1, whi_[2] - wlo_[2] + 1};
  for (;;) {
    // accrue holding time when inside the window
    if (x.c[0] >= wlo_[0] && x.c[0] <= whi_[0] && x.c[1] >= wlo_[1] && x.c[1] <= whi_[1] &&
        x.c[2] >= wlo_[2] && x.c[2] <= whi_[2]) {
      size_t idx = (size_t(x.c[0] - wlo_[0]) * side[1] + size_t(x.c[1] - wlo_[1])) * side[2] +
                   size_t(x.c[2] - wlo_[2]);
      int32_t wi = windex_[idx];
      if (wi >= 0) times[wi] += rng.exponential();
    }
    uint64_t dir = rng.bounded(6);
    int axis = int(dir >> 1);
    x.c[axis] += (dir & 1) ? 1 : -1;
    if (std::max({std::abs(x.c[0]), std::abs(x.c[1]), std::abs(x.c[2])}) > R_) {
      if (mode_ == WalkMode::Truncated) return;
      const ShellEntry& e = shell_[shell_index(x)];
      const RepKernel& k = reps_[e.rep];
      if (rng.uniform() >= k.mass) return;  // escapes to infinity
      size_t j = sample_cdf(k.cdf, rng);
      // map the sampled entry site back through the inverse group element:
      // z_{perm[k]} = sign_{perm[k]} * zc_k
      const LatticePoint& zc = window_[j];
      LatticePoint z;
      for (int kk = 0; kk < 3; ++kk) {
        int p = kPerm3[e.perm][kk];
        z.c[p] = (e.signs >> p) & 1 ? -zc.c[kk] : zc.c[kk];
      }
      x = z;
    }
  }
}

void InterlacementSampler::sample(double u, Rng& rng, OccupationField& out) const {
  if (u < 0) throw std::invalid_argument("InterlacementSampler: u >= 0 required");
  out.level = u;
  out.times.assign(window_.size(), 0.0);
  out.trajectory_count = rng.poisson(u * eq_.capacity);
  for (uint64_t t = 0; t < out.trajectory_count; ++t) run_trajectory(rng, out.times);
}

void InterlacementSampler::sample_coupled(double u_lo, double u_hi, Rng& rng,
                                          OccupationField& low,
                                          OccupationField& high) const {
  if (!(0 <= u_lo && u_lo <= u_hi))
    throw std::invalid_argument("sample_coupled: need 0 <= u_lo <= u_hi");
  low.level = u_lo;
  high.level = u_hi;
  low.times.assign(window_.size(), 0.0);
  high.times.assign(window_.size(), 0.0);
  low.trajectory_count = 0;
  high.trajectory_count = rng.poisson(u_hi * eq_.capacity);
  std::vector<double> traj(window_.size());
  for (uint64_t t = 0; t < high.trajectory_count; ++t) {
    double label = rng.uniform() * u_hi;
    std::fill(traj.begin(), traj.end(), 0.0);
    run_trajectory(rng, traj);
    for (size_t i = 0; i < traj.size(); ++i) high.times[i] += traj[i];
    if (label <= u_lo) {
      ++low.trajectory_count;
      for (size_t i = 0; i < traj.size(); ++i) low.times[i] += traj[i];
    }
  }
}

double InterlacementSampler::truncation_bias_bound(double u) const {
  double p = max_return_mass_;
  if (p >= 1) return std::numeric_limits<double>::infinity();
  return u * eq_.capacity * p / (1 - p) * table_->g0();
}

RescaledMeasure build_rescaled_measure(const OccupationField& field,
                                       const std::vector<LatticePoint>& window, int N,
                                       int dim, Regime regime, double u_N) {
  if (field.level != u_N)
    throw std::invalid_argument("build_rescaled_measure: field level != u_N");
  if (field.times.size() != window.size())
    throw std::invalid_argument("build_rescaled_measure: field/window mismatch");
  RescaledMeasure m;
  m.N = N;
  m.level = u_N;
  m.regime = regime;
  m.sites = &window;
  m.atoms.resize(field.times.size());
  const double cell = 1.0 / (dim * double(N) * double(N));
  if (regime == Regime::ConstantIntensity) {
    for (size_t i = 0; i < m.atoms.size(); ++i) m.atoms[i] = cell * field.times[i];
  } else {
    const double a_N = std::sqrt(2.0 / dim * std::pow(double(N), dim - 2) * u_N);
    for (size_t i = 0; i < m.atoms.size(); ++i)
      m.atoms[i] = cell / a_N * (field.times[i] - u_N);
  }
  return m;
}

double pair_measure(const RescaledMeasure& m, const TestFunctionSpec& V) {
  require_support_covered(*m.sites, V, m.N, V.dim);
  double s = 0;
  double y[kMaxDim];
  for (size_t i = 0; i < m.sites->size(); ++i) {
    for (int k = 0; k < V.dim; ++k) y[k] = double((*m.sites)[i].c[k]) / m.N;
    s += m.atoms[i] * V(y);
  }
  return s;
}

}  // namespace intlace
