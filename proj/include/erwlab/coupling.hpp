#ifndef ERWLAB_COUPLING_HPP
#define ERWLAB_COUPLING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "erwlab/walk.hpp"

namespace erwlab {

// Shared driving noise for the stationary comparison walk and the m-ERW at
// two bias levels beta0 <= beta. The transverse walk freezes exactly when
// eta = 1; joint triples (xi_bar, zeta_bar, zeta) are monotone coordinatewise
// with masses p111 = 1/2, p011 = beta0/2, p001 = (beta-beta0)/2,
// p000 = (1-beta)/2.
struct DrivingNoise {
  int d = 2;
  double beta0 = 0.0, beta = 0.0;
  std::int64_t n = 0, burnin = 0;
  // index j covers time i = j - burnin for eta/zdir; triples cover i >= 0
  std::vector<std::uint8_t> eta;
  std::vector<std::uint8_t> zdir;    // choice among the 2(d-1) transverse moves
  std::vector<std::uint8_t> triple;  // bit0 xi_bar, bit1 zeta_bar, bit2 zeta
};

DrivingNoise sample_noise(int d, double beta0, double beta, std::int64_t n,
                          std::int64_t burnin, std::uint64_t seed);

// Default burn-in for the truncated "Z fresh relative to the infinite past"
// test: 10 sqrt(n) + 1000.
std::int64_t default_burnin(std::int64_t n);

struct CoupledPair {
  Trajectory ybar;  // stationary walk at beta0 (one-sided output)
  Trajectory y;     // m-ERW at beta
  std::vector<std::uint8_t> znew;  // transverse-novelty flags, one per step
  int d = 2;
  double beta0 = 0.0, beta = 0.0;
  std::uint32_t m = 1;
  std::int64_t burnin = 0;
};

CoupledPair build_pair(const DrivingNoise& noise, std::uint32_t m);

struct CouplingReport {
  bool dominance_ok = true;
  std::int64_t first_violation = -1;  // step index of the first failure
  bool shared_renewals_ok = true;
  std::int64_t first_renewal_violation = -1;  // offending tau of ybar
  std::int64_t renewals_checked = 0;
};

// Pathwise checks of the construction: increment dominance
// Xbar_{n+1}-Xbar_n <= X_{n+1}-X_n at every step, and every confirmed
// renewal of the stationary walk satisfying the renewal property for the
// m-ERW as well. Violations are reported, never thrown.
CouplingReport verify(const CoupledPair& pair, std::int64_t confirm_margin = 0);

void write_coupled_csv(const CoupledPair& pair, const DrivingNoise& noise,
                       const std::string& path);

}  // namespace erwlab

#endif
