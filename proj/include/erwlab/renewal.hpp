#ifndef ERWLAB_RENEWAL_HPP
#define ERWLAB_RENEWAL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erwlab/walk.hpp"

namespace erwlab {

// Renewal times of the first coordinate: indices where the running record is
// achieved and never undercut within the observed window. The definition
// lives on infinite paths; on a finite horizon a candidate is confirmed only
// when the whole observed suffix respects its level, and candidates with
// fewer than confirm_margin observed suffix steps are censored instead.
struct RenewalRecord {
  std::vector<std::int64_t> taus;
  std::int64_t horizon = 0;        // number of steps observed (indices 0..horizon)
  std::int64_t confirm_margin = 0;
  bool censored_tail = false;
};

// Two independent detectors; they must agree on every input.
RenewalRecord detect_direct(std::span<const std::int64_t> xs,
                            std::int64_t confirm_margin = 0);
RenewalRecord detect_sd(std::span<const std::int64_t> xs,
                        std::int64_t confirm_margin = 0);

inline RenewalRecord detect_direct(const Trajectory& traj,
                                   std::int64_t confirm_margin = 0) {
  return detect_direct(std::span<const std::int64_t>(traj.xs), confirm_margin);
}
inline RenewalRecord detect_sd(const Trajectory& traj,
                               std::int64_t confirm_margin = 0) {
  return detect_sd(std::span<const std::int64_t>(traj.xs), confirm_margin);
}

enum class FlagSource { novelty, excitation };

struct Cycle {
  std::int64_t k = 0;   // 1-based cycle index
  std::int64_t dt = 0;  // tau_{k+1} - tau_k
  std::int64_t dx = 0;  // X_{tau_{k+1}} - X_{tau_k}
  std::int64_t dn = 0;  // flagged-arrival count inside the cycle
  double dv = 0.0;      // score increment at beta0 over the cycle
};

// Inter-renewal cycles k >= 1; the prefix [0, tau_1) and the censored tail
// are discarded. dn/dv use the requested flag source (novelty flags
// reproduce the m = 1 quantities, excitation flags the general-m ones).
std::vector<Cycle> extract_cycles(const Trajectory& traj,
                                  const RenewalRecord& record, double beta0,
                                  FlagSource flags);

// Same harvesting from raw series, for callers that stream their own paths.
std::vector<Cycle> extract_cycles(std::span<const std::int64_t> xs,
                                  std::span<const std::int8_t> eps,
                                  std::span<const std::uint8_t> flags,
                                  const RenewalRecord& record, double beta0);

void write_cycles_csv(std::span<const Cycle> cycles, const std::string& path);

}  // namespace erwlab

#endif
