#include "erwlab/renewal.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace erwlab {

RenewalRecord detect_direct(std::span<const std::int64_t> xs,
                            std::int64_t confirm_margin) {
  if (xs.empty()) throw error(errc::config, "empty path");
  const std::int64_t n = static_cast<std::int64_t>(xs.size()) - 1;
  RenewalRecord rec;
  rec.horizon = n;
  rec.confirm_margin = confirm_margin;

  std::vector<std::int64_t> suffix_min(n + 2);
  suffix_min[n + 1] = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t i = n; i >= 0; --i)
    suffix_min[i] = std::min(xs[i], suffix_min[i + 1]);

  std::int64_t prefix_max = xs[0];
  for (std::int64_t i = 1; i <= n; ++i) {
    if (prefix_max < xs[i] && xs[i] <= suffix_min[i]) {
      if (n - i >= confirm_margin) {
        rec.taus.push_back(i);
      } else {
        rec.censored_tail = true;
        break;
      }
    }
    prefix_max = std::max(prefix_max, xs[i]);
  }
  return rec;
}

// Literal S_k / D_k / R_k recursion: S_{k+1} is the first passage above
// R_k + 1, D_{k+1} the first return below the S_{k+1} level, R_{k+1} the
// running maximum up to D_{k+1}. The first S with no return inside the
// window is the renewal; the construction then restarts on the shifted path.
RenewalRecord detect_sd(std::span<const std::int64_t> xs,
                        std::int64_t confirm_margin) {
  if (xs.empty()) throw error(errc::config, "empty path");
  const std::int64_t n = static_cast<std::int64_t>(xs.size()) - 1;
  RenewalRecord rec;
  rec.horizon = n;
  rec.confirm_margin = confirm_margin;

  // own suffix minima for the "no return within the window" test
  std::vector<std::int64_t> smin(n + 2);
  smin[n + 1] = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t i = n; i >= 0; --i) smin[i] = std::min(xs[i], smin[i + 1]);

  std::int64_t base = 0;
  while (base < n) {
    std::int64_t r = xs[base];  // R_0 of the shifted path
    std::int64_t d = base;      // D_0 of the shifted path
    std::int64_t tau = -1;
    while (true) {
      // S_{k+1} = T_{R_k + 1}
      std::int64_t s = d + 1;
      while (s <= n && xs[s] < r + 1) ++s;
      if (s > n) break;  // T never triggers in the window: no further candidate
      if (smin[s + 1] >= xs[s]) {
        // D-bar after the shift never triggers in the window
        if (n - s >= confirm_margin) {
          tau = s;
        } else {
          rec.censored_tail = true;
        }
        break;
      }
      // walk to D_{k+1}, tracking the running maximum for R_{k+1}
      std::int64_t running_max = xs[s];
      std::int64_t j = s + 1;
      while (xs[j] >= xs[s]) {
        running_max = std::max(running_max, xs[j]);
        ++j;
      }
      d = j;
      r = std::max(running_max, r);
    }
    if (tau < 0) break;
    rec.taus.push_back(tau);
    base = tau;  // tau_{k+1} = tau_k + tau_1(Y_{tau_k + .})
  }
  return rec;
}

std::vector<Cycle> extract_cycles(std::span<const std::int64_t> xs,
                                  std::span<const std::int8_t> eps,
                                  std::span<const std::uint8_t> flags,
                                  const RenewalRecord& record, double beta0) {
  if (record.horizon != static_cast<std::int64_t>(xs.size()) - 1)
    throw error(errc::config, "record was built from a different horizon");
  if (record.taus.size() < 2)
    throw error(errc::fewer_than_two_renewals,
                "need at least 2 confirmed renewals, got " +
                    std::to_string(record.taus.size()));
  std::vector<Cycle> cycles;
  cycles.reserve(record.taus.size() - 1);
  for (std::size_t k = 0; k + 1 < record.taus.size(); ++k) {
    const std::int64_t a = record.taus[k];
    const std::int64_t b = record.taus[k + 1];
    Cycle c;
    c.k = static_cast<std::int64_t>(k) + 1;
    c.dt = b - a;
    c.dx = xs[b] - xs[a];
    for (std::int64_t i = a; i < b; ++i) {
      const int f = flags[i];
      c.dn += f;
      if (f) {
        const double e = static_cast<double>(eps[i]);
        c.dv += e / (1.0 + beta0 * e);
      }
    }
    cycles.push_back(c);
  }
  return cycles;
}

std::vector<Cycle> extract_cycles(const Trajectory& traj,
                                  const RenewalRecord& record, double beta0,
                                  FlagSource flags) {
  const auto& f = flags == FlagSource::novelty ? traj.novelty : traj.excited;
  return extract_cycles(std::span<const std::int64_t>(traj.xs),
                        std::span<const std::int8_t>(traj.eps),
                        std::span<const std::uint8_t>(f), record, beta0);
}

void write_cycles_csv(std::span<const Cycle> cycles, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw error(errc::io, "cannot open " + path + " for writing");
  std::fprintf(f, "k,dt,dx,dn,dv\n");
  for (const Cycle& c : cycles)
    std::fprintf(f, "%lld,%lld,%lld,%lld,%.17g\n", static_cast<long long>(c.k),
                 static_cast<long long>(c.dt), static_cast<long long>(c.dx),
                 static_cast<long long>(c.dn), c.dv);
  std::fclose(f);
}

}  // namespace erwlab
