#ifndef ERWLAB_ESTIMATORS_HPP
#define ERWLAB_ESTIMATORS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erwlab/renewal.hpp"
#include "erwlab/walk.hpp"

namespace erwlab {

// Mergeable (count, mean, M2) accumulator with Welford updates; merge uses
// the pairwise-update formulas and is associative and commutative up to
// floating-point reassociation.
struct EstimateSummary {
  std::string label;
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d1 = x - mean;
    mean += d1 / count;
    m2 += d1 * (x - mean);
  }
  void merge(const EstimateSummary& other);
  double stderr_of_mean() const;
};

EstimateSummary summarize(std::string label, std::span<const double> xs);

// Reported form of any estimate; ratio and bootstrap estimators carry their
// own error semantics so they do not round-trip through (count, mean, m2).
struct Estimate {
  std::string observable;
  std::int64_t count = 0;  // replicates or cycles
  double mean = 0.0;
  double stderr_est = 0.0;
  std::string method;
};

Estimate to_estimate(const EstimateSummary& s, std::string method);

// Per-replicate observables at a common horizon n. excited counts reduce to
// distinct-site counts when m = 1.
struct ReplicateStats {
  double x_over_n = 0.0;        // X_n / n
  double exc_over_n = 0.0;      // E_n / n  (novelty count for m = 1)
  double exc_score_over_n = 0.0;  // E_n * V_n / n with V at beta0 = beta
  double range_over_n = 0.0;    // R_n / n
};

struct SpeedFinitePair {
  Estimate direct;       // mean X_n/n
  Estimate via_novelty;  // (beta/d) * mean E_n/n
};

SpeedFinitePair speed_finite_time(std::span<const ReplicateStats> reps,
                                  const WalkParams& params);

// Ratio estimator mean(dx)/mean(dt) with a delta-method standard error.
Estimate speed_regenerative(std::span<const Cycle> cycles);

// (1/d) mean(E_n/n) + (beta/d) mean(E_n V_n / n); linear in the replicate
// observables, so the stderr is the plain sample one.
Estimate derivative_finite_time(std::span<const ReplicateStats> reps,
                                const WalkParams& params);

// Plug-in renewal-cycle derivative
//   (1/d) EN/Et + (beta/d) (E(NV) Et - EN E(tV)) / Et^2
// with a nonparametric bootstrap over cycles for the standard error.
Estimate derivative_regenerative(std::span<const Cycle> cycles,
                                 const WalkParams& params,
                                 int bootstrap_resamples = 1000,
                                 std::uint64_t bootstrap_seed = 12345);

Estimate range_rate(std::span<const double> range_over_n);
Estimate truncated_rate(std::span<const double> window_count_over_n, int k);

}  // namespace erwlab

#endif
