#include "erwlab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "erwlab/renewal.hpp"
#include "erwlab/rng.hpp"
#include "erwlab/visit_map.hpp"

namespace erwlab {

std::int64_t default_burnin(std::int64_t n) {
  return static_cast<std::int64_t>(10.0 * std::sqrt(static_cast<double>(n))) + 1000;
}

DrivingNoise sample_noise(int d, double beta0, double beta, std::int64_t n,
                          std::int64_t burnin, std::uint64_t seed) {
  if (beta < beta0)
    throw error(errc::invalid_bias_order,
                "coupling requires beta0 <= beta, got beta0 = " +
                    std::to_string(beta0) + ", beta = " + std::to_string(beta));
  if (d < 2 || d > kMaxDim) throw error(errc::config, "d out of range");
  if (!(beta0 >= 0.0 && beta <= 1.0)) throw error(errc::config, "biases must lie in [0,1]");
  if (burnin < 0) throw error(errc::config, "burnin must be >= 0");

  DrivingNoise noise;
  noise.d = d;
  noise.beta0 = beta0;
  noise.beta = beta;
  noise.n = n;
  noise.burnin = burnin;
  noise.eta.resize(burnin + n);
  noise.zdir.resize(burnin + n);
  noise.triple.resize(n);

  Rng rng(seed);
  const double p_eta = 1.0 / d;
  const int n_zmoves = 2 * (d - 1);
  // fixed consumption order per index: eta, zdir, then (for i >= 0) the triple
  for (std::int64_t j = 0; j < burnin + n; ++j) {
    noise.eta[j] = rng.uniform01() < p_eta;
    noise.zdir[j] = static_cast<std::uint8_t>(rng.below(n_zmoves));
    if (j >= burnin) {
      const double u = rng.uniform01();
      std::uint8_t t;
      if (u < 0.5)
        t = 0b111;
      else if (u < 0.5 + beta0 / 2.0)
        t = 0b110;
      else if (u < 0.5 + beta / 2.0)
        t = 0b100;
      else
        t = 0b000;
      noise.triple[j - burnin] = t;
    }
  }
  return noise;
}

namespace {

// Transverse path on Z^{d-1} over times [-burnin, n], glued at Z_0 = 0 from
// two independent halves (the kernel is symmetric, so running the negative
// half forward gives the right two-sided law).
std::vector<std::int64_t> build_z_path(const DrivingNoise& noise) {
  const int dz = noise.d - 1;
  const std::int64_t len = noise.burnin + noise.n + 1;  // times -burnin .. n
  std::vector<std::int64_t> z(len * dz, 0);
  auto at = [&](std::int64_t t) { return z.data() + (t + noise.burnin) * dz; };

  // negative half: Z_{-j-1} = Z_{-j} + move(eta_{-j-1}, zdir_{-j-1})
  for (std::int64_t t = -1; t >= -noise.burnin; --t) {
    const std::int64_t j = t + noise.burnin;  // noise index of step t
    const std::int64_t* src = at(t + 1);
    std::int64_t* dst = at(t);
    std::copy(src, src + dz, dst);
    if (!noise.eta[j]) {
      const int axis = noise.zdir[j] >> 1;
      dst[axis] += (noise.zdir[j] & 1) ? -1 : +1;
    }
  }
  // positive half
  for (std::int64_t t = 0; t < noise.n; ++t) {
    const std::int64_t j = t + noise.burnin;
    const std::int64_t* src = at(t);
    std::int64_t* dst = at(t + 1);
    std::copy(src, src + dz, dst);
    if (!noise.eta[j]) {
      const int axis = noise.zdir[j] >> 1;
      dst[axis] += (noise.zdir[j] & 1) ? -1 : +1;
    }
  }
  return z;
}

Trajectory assemble(const DrivingNoise& noise,
                    const std::vector<std::int64_t>& zpath,
                    const std::vector<std::int64_t>& xs) {
  Trajectory traj;
  traj.d = noise.d;
  traj.steps = noise.n;
  traj.xs = xs;
  const int dz = noise.d - 1;
  traj.coords.resize((noise.n + 1) * noise.d);
  for (std::int64_t t = 0; t <= noise.n; ++t) {
    traj.coords[t * noise.d] = xs[t];
    const std::int64_t* zp = zpath.data() + (t + noise.burnin) * dz;
    for (int c = 0; c < dz; ++c) traj.coords[t * noise.d + 1 + c] = zp[c];
  }
  traj.eps.resize(noise.n);
  for (std::int64_t t = 0; t < noise.n; ++t)
    traj.eps[t] = static_cast<std::int8_t>(xs[t + 1] - xs[t]);
  // site-novelty annotations via a fresh visit map
  traj.novelty.assign(noise.n + 1, 0);
  traj.excited.assign(noise.n + 1, 0);
  VisitMap visits(static_cast<std::size_t>(noise.n + 1));
  for (std::int64_t t = 0; t <= noise.n; ++t) {
    const std::uint32_t prior = visits.increment(pack_point(traj.point(t)));
    traj.novelty[t] = prior == 0;
    traj.excited[t] = prior == 0;  // provisional; caller overwrites for m > 1
  }
  return traj;
}

}  // namespace

CoupledPair build_pair(const DrivingNoise& noise, std::uint32_t m) {
  if (m < 1) throw error(errc::config, "m must be >= 1");
  const int dz = noise.d - 1;
  const auto zpath = build_z_path(noise);

  // transverse-novelty flags relative to the truncated past
  std::vector<std::uint8_t> znew(noise.n, 0);
  {
    VisitMap seen(static_cast<std::size_t>(noise.burnin + noise.n + 1));
    for (std::int64_t t = -noise.burnin; t < 0; ++t)
      seen.increment(pack_point(
          {zpath.data() + (t + noise.burnin) * dz, static_cast<std::size_t>(dz)}));
    for (std::int64_t t = 0; t < noise.n; ++t) {
      const std::uint32_t prior = seen.increment(pack_point(
          {zpath.data() + (t + noise.burnin) * dz, static_cast<std::size_t>(dz)}));
      znew[t] = prior == 0;
    }
  }

  // m-ERW horizontal component, with its own site-visit bookkeeping
  std::vector<std::int64_t> x(noise.n + 1, 0);
  std::vector<std::uint8_t> y_excited(noise.n + 1, 0);
  {
    VisitMap visits(static_cast<std::size_t>(noise.n + 1));
    std::vector<std::int64_t> point(noise.d, 0);
    auto arrival = [&](std::int64_t t) {
      point[0] = x[t];
      const std::int64_t* zp = zpath.data() + (t + noise.burnin) * dz;
      for (int c = 0; c < dz; ++c) point[1 + c] = zp[c];
      const std::uint32_t prior =
          visits.increment(pack_point(std::span<const std::int64_t>(point)));
      y_excited[t] = prior < m;
    };
    arrival(0);
    for (std::int64_t t = 0; t < noise.n; ++t) {
      const std::int64_t j = t + noise.burnin;
      std::int64_t inc = 0;
      if (noise.eta[j]) {
        const std::uint8_t tr = noise.triple[t];
        const int bit = y_excited[t] ? (tr >> 2) & 1 : tr & 1;  // zeta or xi_bar
        inc = 2 * bit - 1;
      }
      x[t + 1] = x[t] + inc;
      arrival(t + 1);
    }
  }

  // stationary walk horizontal component
  std::vector<std::int64_t> xbar(noise.n + 1, 0);
  for (std::int64_t t = 0; t < noise.n; ++t) {
    const std::int64_t j = t + noise.burnin;
    std::int64_t inc = 0;
    if (noise.eta[j]) {
      const std::uint8_t tr = noise.triple[t];
      const int bit = znew[t] ? (tr >> 1) & 1 : tr & 1;  // zeta_bar or xi_bar
      inc = 2 * bit - 1;
    }
    xbar[t + 1] = xbar[t] + inc;
  }

  CoupledPair pair;
  pair.d = noise.d;
  pair.beta0 = noise.beta0;
  pair.beta = noise.beta;
  pair.m = m;
  pair.burnin = noise.burnin;
  pair.znew = std::move(znew);
  pair.y = assemble(noise, zpath, x);
  pair.y.excited.assign(y_excited.begin(), y_excited.end());
  pair.ybar = assemble(noise, zpath, xbar);
  return pair;
}

CouplingReport verify(const CoupledPair& pair, std::int64_t confirm_margin) {
  CouplingReport rep;
  const std::int64_t n = pair.y.steps;
  for (std::int64_t t = 0; t < n; ++t) {
    if (pair.ybar.eps[t] > pair.y.eps[t]) {
      rep.dominance_ok = false;
      rep.first_violation = t;
      break;
    }
  }
  const RenewalRecord bar = detect_direct(pair.ybar, confirm_margin);
  rep.renewals_checked = static_cast<std::int64_t>(bar.taus.size());
  // renewal property of the m-ERW at each confirmed tau of the stationary walk
  std::vector<std::int64_t> suffix_min(n + 2);
  suffix_min[n + 1] = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t i = n; i >= 0; --i)
    suffix_min[i] = std::min(pair.y.xs[i], suffix_min[i + 1]);
  std::vector<std::int64_t> prefix_max(n + 1);
  prefix_max[0] = pair.y.xs[0];
  for (std::int64_t i = 1; i <= n; ++i)
    prefix_max[i] = std::max(prefix_max[i - 1], pair.y.xs[i]);
  for (std::int64_t tau : bar.taus) {
    const bool ok = tau >= 1 && prefix_max[tau - 1] < pair.y.xs[tau] &&
                    pair.y.xs[tau] <= suffix_min[tau];
    if (!ok) {
      rep.shared_renewals_ok = false;
      rep.first_renewal_violation = tau;
      break;
    }
  }
  return rep;
}

void write_coupled_csv(const CoupledPair& pair, const DrivingNoise& noise,
                       const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw error(errc::io, "cannot open " + path + " for writing");
  std::fprintf(f, "step,xbar,x");
  for (int c = 1; c < pair.d; ++c) std::fprintf(f, ",z%d", c);
  std::fprintf(f, ",eta,xi_bar,zeta_bar,zeta,znew,excited\n");
  for (std::int64_t t = 0; t <= pair.y.steps; ++t) {
    std::fprintf(f, "%lld,%lld,%lld", static_cast<long long>(t),
                 static_cast<long long>(pair.ybar.xs[t]),
                 static_cast<long long>(pair.y.xs[t]));
    auto p = pair.y.point(t);
    for (int c = 1; c < pair.d; ++c)
      std::fprintf(f, ",%lld", static_cast<long long>(p[c]));
    if (t < pair.y.steps) {
      const std::uint8_t tr = noise.triple[t];
      std::fprintf(f, ",%d,%d,%d,%d,%d,%d\n", int(noise.eta[t + noise.burnin]),
                   int(tr & 1), int((tr >> 1) & 1), int((tr >> 2) & 1),
                   int(pair.znew[t]), int(pair.y.excited[t]));
    } else {
      std::fprintf(f, ",,,,,,\n");
    }
  }
  std::fclose(f);
}

}  // namespace erwlab
