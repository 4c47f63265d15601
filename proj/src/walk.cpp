#include "erwlab/walk.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace erwlab {

void WalkParams::validate() const {
  if (d < 2 || d > kMaxDim)
    throw error(errc::config, "lattice dimension d must be in [2, " +
                                  std::to_string(kMaxDim) + "], got " +
                                  std::to_string(d));
  if (!(beta >= 0.0 && beta <= 1.0))
    throw error(errc::config, "beta must lie in [0,1], got " + std::to_string(beta));
  if (kind == WalkKind::symmetric && beta != 0.0)
    throw error(errc::config, "symmetric walk requires beta = 0");
  if (kind == WalkKind::merw && m < 1)
    throw error(errc::config, "excitation threshold m must be >= 1");
}

std::string WalkParams::kind_name() const {
  switch (kind) {
    case WalkKind::merw: return "merw";
    case WalkKind::biased_srw: return "biased_srw";
    case WalkKind::symmetric: return "symmetric";
  }
  return "?";
}

std::vector<double> step_probabilities(const WalkParams& params, bool excited) {
  params.validate();
  const int d = params.d;
  const double inv = 1.0 / (2.0 * d);
  const double b = excited ? params.beta : 0.0;
  std::vector<double> probs(2 * d, inv);
  probs[0] = (1.0 + b) * inv;
  probs[1] = (1.0 - b) * inv;
  return probs;
}

namespace {

void fill_cum(std::array<double, 2 * kMaxDim>& cum, int d, double beta) {
  const double inv = 1.0 / (2.0 * d);
  double acc = 0.0;
  for (int j = 0; j < 2 * d; ++j) {
    double p = inv;
    if (j == 0) p = (1.0 + beta) * inv;
    if (j == 1) p = (1.0 - beta) * inv;
    acc += p;
    cum[j] = acc;
  }
  cum[2 * d - 1] = 1.0;  // close the distribution against rounding
}

}  // namespace

WalkSim::WalkSim(const WalkParams& params, std::uint64_t seed, bool track_sites)
    : p_(params), rng_(seed), limit_(coord_limit(params.d)), track_(track_sites) {
  p_.validate();
  fill_cum(cum_excited_, p_.d, p_.beta);
  fill_cum(cum_plain_, p_.d, 0.0);
  // the map can only be skipped when excitation does not steer the walk
  track_ = track_sites || p_.kind == WalkKind::merw;
  if (track_) visits_.increment(pack_point(position()));
}

std::int8_t WalkSim::step() {
  const double u = rng_.uniform01();
  const auto& cum = cur_excited_ ? cum_excited_ : cum_plain_;
  const int n_moves = 2 * p_.d;
  int j = 0;
  while (j + 1 < n_moves && u >= cum[j]) ++j;
  const int axis = j >> 1;
  const std::int64_t delta = (j & 1) ? -1 : +1;
  pos_[axis] += delta;
  if (pos_[axis] > limit_ || pos_[axis] < -limit_)
    throw error(errc::coord_overflow,
                "coordinate " + std::to_string(axis) + " left the representable box |c| <= " +
                    std::to_string(limit_) + " at step " + std::to_string(t_));
  ++t_;
  std::int8_t eps = axis == 0 ? static_cast<std::int8_t>(delta) : std::int8_t{0};
  if (track_) {
    std::uint32_t prior = visits_.increment(pack_point(position()));
    cur_novel_ = prior == 0;
    cur_excited_ = p_.always_excited() || prior < p_.m;
  } else {
    cur_novel_ = false;
    cur_excited_ = true;  // biased srw
  }
  sum_novel_ += cur_novel_;
  sum_excited_ += cur_excited_;
  return eps;
}

Trajectory simulate_trajectory(const WalkParams& params, std::int64_t n_steps,
                               std::uint64_t seed) {
  if (n_steps < 0) throw error(errc::config, "n_steps must be >= 0");
  WalkSim sim(params, seed);
  Trajectory traj;
  traj.d = params.d;
  traj.steps = n_steps;
  traj.coords.reserve((n_steps + 1) * params.d);
  traj.xs.reserve(n_steps + 1);
  traj.eps.reserve(n_steps);
  traj.novelty.reserve(n_steps + 1);
  traj.excited.reserve(n_steps + 1);

  auto record_arrival = [&]() {
    auto p = sim.position();
    traj.coords.insert(traj.coords.end(), p.begin(), p.end());
    traj.xs.push_back(sim.x());
    traj.novelty.push_back(sim.novel());
    traj.excited.push_back(sim.excited());
  };
  record_arrival();
  for (std::int64_t i = 0; i < n_steps; ++i) {
    traj.eps.push_back(sim.step());
    record_arrival();
  }
  return traj;
}

std::int64_t Trajectory::novelty_count(std::int64_t n) const {
  std::int64_t s = 0;
  for (std::int64_t i = 0; i < n; ++i) s += novelty[i];
  return s;
}

std::int64_t Trajectory::excited_count(std::int64_t n) const {
  std::int64_t s = 0;
  for (std::int64_t i = 0; i < n; ++i) s += excited[i];
  return s;
}

std::int64_t Trajectory::range_count(std::int64_t n) const {
  std::int64_t s = 0;
  for (std::int64_t i = 0; i <= n; ++i) s += novelty[i];
  return s;
}

std::vector<std::uint8_t> annotate_window_novelty(const Trajectory& traj, int k) {
  if (k < 1) throw error(errc::config, "window k must be >= 1");
  const std::int64_t n = traj.steps;
  std::vector<std::uint8_t> flags(n + 1, 1);
  for (std::int64_t i = 0; i <= n; ++i) {
    if (i <= k) {
      flags[i] = traj.novelty[i];
      continue;
    }
    auto cur = traj.point(i);
    std::uint8_t fresh = 1;
    for (std::int64_t j = i - 1; j >= i - k; --j) {
      auto prev = traj.point(j);
      bool eq = true;
      for (int c = 0; c < traj.d; ++c)
        if (prev[c] != cur[c]) { eq = false; break; }
      if (eq) { fresh = 0; break; }
    }
    flags[i] = fresh;
  }
  return flags;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw error(errc::io, "cannot open " + path + " for writing");
  std::fprintf(f, "step,x");
  for (int c = 1; c < traj.d; ++c) std::fprintf(f, ",z%d", c);
  std::fprintf(f, ",eps,novel,excited\n");
  for (std::int64_t i = 0; i <= traj.steps; ++i) {
    std::fprintf(f, "%lld", static_cast<long long>(i));
    auto p = traj.point(i);
    for (int c = 0; c < traj.d; ++c)
      std::fprintf(f, ",%lld", static_cast<long long>(p[c]));
    if (i < traj.steps)
      std::fprintf(f, ",%d,%d,%d\n", int(traj.eps[i]), int(traj.novelty[i]),
                   int(traj.excited[i]));
    else
      std::fprintf(f, ",,,\n");
  }
  std::fclose(f);
}

}  // namespace erwlab
