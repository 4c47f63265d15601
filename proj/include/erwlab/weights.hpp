#ifndef ERWLAB_WEIGHTS_HPP
#define ERWLAB_WEIGHTS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erwlab/renewal.hpp"
#include "erwlab/walk.hpp"

namespace erwlab {

// Accumulated log likelihood ratio between the beta and beta0 walk laws and
// the score process at beta0. Weights stay in log space; a target-law zero
// (beta = 1 against an excited left step) is the exact value log_m = -inf.
struct WeightState {
  double log_m = 0.0;
  double v_score = 0.0;
  std::int64_t n = 0;
};

// One step: log_m += log(1 + beta*eps*flag) - log(1 + beta0*eps*flag),
// v_score += eps*flag / (1 + beta0*eps*flag).
WeightState accumulate(WeightState state, std::int8_t eps, bool excited_flag,
                       double beta, double beta0);

WeightState weigh_path(std::span<const std::int8_t> eps,
                       std::span<const std::uint8_t> flags, double beta,
                       double beta0);

// log M over [0, tau_1) and over each inter-renewal cycle. The cycle-law
// mean of exp(cycle_log_m) is 1; the prefix mean estimates the ratio of
// no-return probabilities and is reported, not normalized away.
struct TauWeights {
  double prefix_log_m = 0.0;
  std::vector<double> cycle_log_m;
  std::vector<double> cycle_v_score;
};

TauWeights weight_at_tau(const Trajectory& traj, const RenewalRecord& record,
                         double beta, double beta0, FlagSource flags);

// Self-normalized importance-sampling mean with log-sum-exp stabilization.
struct ReweightedMean {
  double mean = 0.0;
  double stderr_est = 0.0;  // delta-method standard error
  double ess = 0.0;         // effective sample size
  std::size_t n_finite = 0;
};

ReweightedMean reweighted_mean(std::span<const double> values,
                               std::span<const double> log_weights);

void write_weights_csv(std::span<const WeightState> states,
                       const std::string& path);

}  // namespace erwlab

#endif
