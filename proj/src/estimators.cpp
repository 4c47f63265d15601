#include "erwlab/estimators.hpp"

#include <cmath>
#include <limits>

#include "erwlab/rng.hpp"

namespace erwlab {

void EstimateSummary::merge(const EstimateSummary& other) {
  if (label != other.label)
    throw error(errc::label_mismatch,
                "cannot merge '" + label + "' with '" + other.label + "'");
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double delta = other.mean - mean;
  const std::int64_t n = count + other.count;
  mean += delta * other.count / n;
  m2 += other.m2 + delta * delta * (static_cast<double>(count) * other.count / n);
  count = n;
}

double EstimateSummary::stderr_of_mean() const {
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(m2 / (static_cast<double>(count) * (count - 1)));
}

EstimateSummary summarize(std::string label, std::span<const double> xs) {
  EstimateSummary s;
  s.label = std::move(label);
  for (double x : xs) s.add(x);
  return s;
}

Estimate to_estimate(const EstimateSummary& s, std::string method) {
  return Estimate{s.label, s.count, s.mean, s.stderr_of_mean(), std::move(method)};
}

SpeedFinitePair speed_finite_time(std::span<const ReplicateStats> reps,
                                  const WalkParams& params) {
  EstimateSummary a, b;
  a.label = "speed";
  b.label = "speed";
  const double scale = params.beta / params.d;
  for (const auto& r : reps) {
    a.add(r.x_over_n);
    b.add(scale * r.exc_over_n);
  }
  return SpeedFinitePair{to_estimate(a, "finite_time_x"),
                         to_estimate(b, "finite_time_novelty")};
}

Estimate speed_regenerative(std::span<const Cycle> cycles) {
  if (cycles.size() < 2)
    throw error(errc::fewer_than_two_renewals,
                "regenerative speed needs at least 2 cycles");
  const double n = static_cast<double>(cycles.size());
  double sx = 0.0, st = 0.0;
  for (const auto& c : cycles) {
    sx += static_cast<double>(c.dx);
    st += static_cast<double>(c.dt);
  }
  const double mx = sx / n, mt = st / n;
  const double r = mx / mt;
  double sxx = 0.0, stt = 0.0, sxt = 0.0;
  for (const auto& c : cycles) {
    const double ex = c.dx - mx, et = c.dt - mt;
    sxx += ex * ex;
    stt += et * et;
    sxt += ex * et;
  }
  sxx /= n - 1;
  stt /= n - 1;
  sxt /= n - 1;
  const double var = (sxx - 2.0 * r * sxt + r * r * stt) / (n * mt * mt);
  return Estimate{"speed", static_cast<std::int64_t>(cycles.size()), r,
                  std::sqrt(std::max(var, 0.0)), "regenerative_ratio"};
}

Estimate derivative_finite_time(std::span<const ReplicateStats> reps,
                                const WalkParams& params) {
  EstimateSummary s;
  s.label = "speed_derivative";
  const double d = params.d;
  for (const auto& r : reps)
    s.add(r.exc_over_n / d + params.beta * r.exc_score_over_n / d);
  return to_estimate(s, "finite_time_score");
}

namespace {

double eq1_plugin(std::span<const Cycle> cycles, double beta, double d,
                  std::span<const std::uint32_t> pick) {
  double st = 0.0, sn = 0.0, snv = 0.0, stv = 0.0;
  const std::size_t n = pick.empty() ? cycles.size() : pick.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Cycle& c = cycles[pick.empty() ? i : pick[i]];
    st += static_cast<double>(c.dt);
    sn += static_cast<double>(c.dn);
    snv += static_cast<double>(c.dn) * c.dv;
    stv += static_cast<double>(c.dt) * c.dv;
  }
  const double mt = st / n, mn = sn / n, mnv = snv / n, mtv = stv / n;
  return mn / (d * mt) + beta * (mnv * mt - mn * mtv) / (d * mt * mt);
}

}  // namespace

Estimate derivative_regenerative(std::span<const Cycle> cycles,
                                 const WalkParams& params,
                                 int bootstrap_resamples,
                                 std::uint64_t bootstrap_seed) {
  if (cycles.size() < 2)
    throw error(errc::fewer_than_two_renewals,
                "regenerative derivative needs at least 2 cycles");
  const double est = eq1_plugin(cycles, params.beta, params.d, {});

  double se = 0.0;
  if (bootstrap_resamples > 0) {
    Rng rng(bootstrap_seed);
    const std::uint32_t n = static_cast<std::uint32_t>(cycles.size());
    std::vector<std::uint32_t> pick(n);
    double sum = 0.0, sum2 = 0.0;
    for (int b = 0; b < bootstrap_resamples; ++b) {
      for (auto& p : pick) p = rng.below(n);
      const double v = eq1_plugin(cycles, params.beta, params.d, pick);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / bootstrap_resamples;
    se = std::sqrt(std::max(sum2 / bootstrap_resamples - mean * mean, 0.0));
  }
  return Estimate{"speed_derivative", static_cast<std::int64_t>(cycles.size()),
                  est, se, "regenerative_eq_bootstrap"};
}

Estimate range_rate(std::span<const double> range_over_n) {
  EstimateSummary s = summarize("range_rate", range_over_n);
  return to_estimate(s, "finite_time_range");
}

Estimate truncated_rate(std::span<const double> window_count_over_n, int k) {
  EstimateSummary s =
      summarize("truncated_rate_k" + std::to_string(k), window_count_over_n);
  return to_estimate(s, "finite_time_window");
}

}  // namespace erwlab
