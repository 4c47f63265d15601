#ifndef ERWLAB_HARNESS_HPP
#define ERWLAB_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "erwlab/estimators.hpp"
#include "erwlab/renewal.hpp"
#include "erwlab/walk.hpp"

namespace erwlab {

// Experiment description; serializes round-trip stably to JSON with keys
// d, m, beta | beta_grid, n, replicates, seed, estimators[], burnin,
// bit_exact, out_dir (+ kind, threads, window_ks, schema_version).
struct ExperimentConfig {
  int d = 2;
  std::optional<std::uint32_t> m = 1;  // nullopt = infinite (biased SRW)
  WalkKind kind = WalkKind::merw;
  std::vector<double> beta_grid = {0.5};
  std::int64_t n = 1000;
  std::int64_t replicates = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> estimators = {"speed_finite"};
  std::int64_t burnin = -1;  // -1: default_burnin(n)
  bool bit_exact = true;
  std::string out_dir;
  int threads = 0;  // 0: hardware concurrency
  std::vector<int> window_ks;
  bool dump_cycles = false;  // write cycles_b<beta>.csv into out_dir

  WalkParams walk_at(double beta) const;
  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

struct GridPointResult {
  double beta = 0.0;
  std::vector<Estimate> estimates;
};

struct ExperimentResults {
  ExperimentConfig config;
  std::vector<GridPointResult> grid;
};

// Known estimator names: speed_finite, speed_regen, derivative_finite,
// derivative_regen, range_rate, truncated_rate (uses window_ks).
ExperimentResults run_experiment(const ExperimentConfig& config);

std::string results_to_json(const ExperimentResults& results);
// Writes results.json (+ config echo) into config.out_dir.
void persist(const ExperimentResults& results);

// ---- building blocks reused across estimators and tests ----------------

// Runs replicates [0, count) of fn in parallel; fn fills exactly its slot,
// and reductions over the slot vector happen in index order afterwards, so
// results do not depend on the worker count.
void parallel_for_replicates(std::int64_t count, int threads,
                             const std::function<void(std::int64_t)>& fn);

std::uint64_t replicate_seed(std::uint64_t master, const std::string& label,
                             std::int64_t index);

// One simulated path reduced to per-replicate observables (optionally at
// several checkpoint horizons), plus the series needed for cycle harvesting.
struct ReplicateRun {
  std::vector<ReplicateStats> at_checkpoints;
  std::vector<double> window_over_n;  // one entry per requested window k
};

struct RunOptions {
  std::vector<std::int64_t> checkpoints;  // defaults to {n}
  std::vector<int> window_ks;
  bool track_novelty = true;
};

ReplicateRun run_replicate(const WalkParams& params, std::int64_t n,
                           std::uint64_t seed, const RunOptions& opts);

// Simulates a path, detects renewals (direct detector) and harvests cycles
// at beta0 = params.beta with the walk-appropriate flags.
std::vector<Cycle> harvest_cycles(const WalkParams& params, std::int64_t horizon,
                                  std::uint64_t seed,
                                  std::int64_t confirm_margin = 0);

}  // namespace erwlab

#endif
