#include "erwlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace erwlab {

WeightState accumulate(WeightState state, std::int8_t eps, bool excited_flag,
                       double beta, double beta0) {
  const double e = excited_flag ? static_cast<double>(eps) : 0.0;
  const double ref = 1.0 + beta0 * e;
  if (ref == 0.0)
    throw error(errc::undefined_weight,
                "reference law gives this step probability zero (beta0 = " +
                    std::to_string(beta0) + ", eps = " + std::to_string(eps) + ")");
  const double target = 1.0 + beta * e;
  if (target == 0.0)
    state.log_m = -std::numeric_limits<double>::infinity();
  else
    state.log_m += std::log(target) - std::log(ref);
  state.v_score += e / ref;
  ++state.n;
  return state;
}

WeightState weigh_path(std::span<const std::int8_t> eps,
                       std::span<const std::uint8_t> flags, double beta,
                       double beta0) {
  WeightState s;
  for (std::size_t i = 0; i < eps.size(); ++i)
    s = accumulate(s, eps[i], flags[i] != 0, beta, beta0);
  return s;
}

TauWeights weight_at_tau(const Trajectory& traj, const RenewalRecord& record,
                         double beta, double beta0, FlagSource flags) {
  if (record.taus.empty())
    throw error(errc::fewer_than_two_renewals, "no confirmed renewals");
  const auto& f = flags == FlagSource::novelty ? traj.novelty : traj.excited;
  TauWeights out;
  auto segment = [&](std::int64_t a, std::int64_t b) {
    WeightState s;
    for (std::int64_t i = a; i < b; ++i)
      s = accumulate(s, traj.eps[i], f[i] != 0, beta, beta0);
    return s;
  };
  out.prefix_log_m = segment(0, record.taus[0]).log_m;
  for (std::size_t k = 0; k + 1 < record.taus.size(); ++k) {
    WeightState s = segment(record.taus[k], record.taus[k + 1]);
    out.cycle_log_m.push_back(s.log_m);
    out.cycle_v_score.push_back(s.v_score);
  }
  return out;
}

ReweightedMean reweighted_mean(std::span<const double> values,
                               std::span<const double> log_weights) {
  if (values.size() != log_weights.size())
    throw error(errc::config, "values and log_weights length mismatch");
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights)
    if (std::isfinite(lw)) max_lw = std::max(max_lw, lw);
  if (!std::isfinite(max_lw))
    throw error(errc::all_weights_zero, "no sample carries positive weight");

  double wsum = 0.0, fwsum = 0.0, w2sum = 0.0;
  std::size_t n_finite = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(log_weights[i])) continue;  // zero weight
    const double w = std::exp(log_weights[i] - max_lw);
    wsum += w;
    fwsum += w * values[i];
    w2sum += w * w;
    ++n_finite;
  }
  ReweightedMean out;
  out.n_finite = n_finite;
  out.mean = fwsum / wsum;
  out.ess = wsum * wsum / w2sum;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(log_weights[i])) continue;
    const double w = std::exp(log_weights[i] - max_lw) / wsum;
    const double r = values[i] - out.mean;
    var += w * w * r * r;
  }
  out.stderr_est = std::sqrt(var);
  return out;
}

void write_weights_csv(std::span<const WeightState> states,
                       const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw error(errc::io, "cannot open " + path + " for writing");
  std::fprintf(f, "replicate,log_m,v_score\n");
  for (std::size_t i = 0; i < states.size(); ++i)
    std::fprintf(f, "%zu,%.17g,%.17g\n", i, states[i].log_m, states[i].v_score);
  std::fclose(f);
}

}  // namespace erwlab
