#ifndef ERWLAB_WALK_HPP
#define ERWLAB_WALK_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erwlab/errors.hpp"
#include "erwlab/rng.hpp"
#include "erwlab/visit_map.hpp"

namespace erwlab {

inline constexpr int kMaxDim = 12;

// merw: drift beta at sites visited fewer than m times, uniform elsewhere.
// biased_srw: every step carries the drift (the m = infinity walk).
// symmetric: uniform nearest-neighbor walk (beta pinned to 0).
enum class WalkKind { merw, biased_srw, symmetric };

struct WalkParams {
  int d = 2;
  WalkKind kind = WalkKind::merw;
  double beta = 0.0;
  std::uint32_t m = 1;  // ignored for biased_srw (infinite excitation)

  static WalkParams merw(int d, std::uint32_t m, double beta) {
    return WalkParams{d, WalkKind::merw, beta, m};
  }
  static WalkParams biased_srw(int d, double beta) {
    return WalkParams{d, WalkKind::biased_srw, beta, 1};
  }
  static WalkParams symmetric(int d) {
    return WalkParams{d, WalkKind::symmetric, 0.0, 1};
  }

  bool always_excited() const { return kind == WalkKind::biased_srw; }
  void validate() const;
  std::string kind_name() const;
};

// Probabilities over the 2d unit moves in the fixed order
// +e1, -e1, +e2, -e2, ..., +ed, -ed.
std::vector<double> step_probabilities(const WalkParams& params, bool excited);

struct Trajectory {
  int d = 2;
  std::int64_t steps = 0;
  std::vector<std::int64_t> coords;  // (steps+1) * d, row-major
  std::vector<std::int64_t> xs;      // steps+1, first coordinate
  std::vector<std::int8_t> eps;      // steps, eps_i = X_{i+1} - X_i
  std::vector<std::uint8_t> novelty;  // steps+1, 1 at first visits
  std::vector<std::uint8_t> excited;  // steps+1, 1 while the site still holds drift

  std::span<const std::int64_t> point(std::int64_t i) const {
    return {coords.data() + i * d, static_cast<std::size_t>(d)};
  }
  // N_n = number of first visits among Y_0..Y_{n-1}
  std::int64_t novelty_count(std::int64_t n) const;
  // number of excited arrivals among Y_0..Y_{n-1}
  std::int64_t excited_count(std::int64_t n) const;
  // R_n = distinct sites among Y_0..Y_n
  std::int64_t range_count(std::int64_t n) const;
};

// Streaming simulator: one uniform draw per step mapped through the
// cumulative step distribution in the fixed move order, so trajectories are
// a seed-stable function of (params, seed) and extending the horizon
// preserves the prefix.
class WalkSim {
 public:
  WalkSim(const WalkParams& params, std::uint64_t seed, bool track_sites = true);

  // Advances one step and returns eps_t; arrival flags refer to the new site.
  std::int8_t step();

  std::int64_t time() const { return t_; }
  std::int64_t x() const { return pos_[0]; }
  std::span<const std::int64_t> position() const {
    return {pos_.data(), static_cast<std::size_t>(p_.d)};
  }
  bool novel() const { return cur_novel_; }    // current site is a first visit
  bool excited() const { return cur_excited_; }  // current site still excites
  // sums of arrival flags over Y_0..Y_t (inclusive)
  std::int64_t novel_arrivals() const { return sum_novel_; }
  std::int64_t excited_arrivals() const { return sum_excited_; }

  const WalkParams& params() const { return p_; }

 private:
  WalkParams p_;
  Rng rng_;
  VisitMap visits_;
  std::array<std::int64_t, kMaxDim> pos_{};
  std::array<double, 2 * kMaxDim> cum_excited_{};
  std::array<double, 2 * kMaxDim> cum_plain_{};
  std::int64_t t_ = 0;
  std::int64_t sum_novel_ = 1, sum_excited_ = 1;
  std::int64_t limit_;
  bool cur_novel_ = true, cur_excited_ = true;
  bool track_;
};

Trajectory simulate_trajectory(const WalkParams& params, std::int64_t n_steps,
                               std::uint64_t seed);

// Window-novelty flags 1{Y_i not in {Y_{i-1},...,Y_{i-k}}}; for i <= k the
// full-history novelty applies.
std::vector<std::uint8_t> annotate_window_novelty(const Trajectory& traj, int k);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace erwlab

#endif
