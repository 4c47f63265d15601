#include "erwlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "erwlab/coupling.hpp"
#include "erwlab/rng.hpp"
#include "erwlab/weights.hpp"

namespace erwlab {

using nlohmann::json;

WalkParams ExperimentConfig::walk_at(double beta) const {
  switch (kind) {
    case WalkKind::merw:
      return WalkParams::merw(d, m.value_or(1), beta);
    case WalkKind::biased_srw:
      return WalkParams::biased_srw(d, beta);
    case WalkKind::symmetric:
      return WalkParams::symmetric(d);
  }
  throw error(errc::config, "bad walk kind");
}

namespace {

const std::vector<std::string> kKnownEstimators = {
    "speed_finite", "speed_regen",  "derivative_finite",
    "derivative_regen", "range_rate", "truncated_rate"};

}  // namespace

void ExperimentConfig::validate() const {
  if (beta_grid.empty()) throw error(errc::config, "beta grid is empty");
  if (n < 1) throw error(errc::config, "horizon n must be >= 1");
  if (replicates < 1) throw error(errc::config, "replicates must be >= 1");
  if (estimators.empty()) throw error(errc::config, "no estimators requested");
  for (const auto& e : estimators) {
    bool known = false;
    for (const auto& k : kKnownEstimators) known = known || k == e;
    if (!known) throw error(errc::config, "unknown estimator '" + e + "'");
    if (e == "truncated_rate" && window_ks.empty())
      throw error(errc::config, "truncated_rate requires window_ks");
    if (e == "range_rate" && kind == WalkKind::merw)
      throw error(errc::config,
                  "range_rate applies to the simple walk family (kind srw or "
                  "symmetric)");
  }
  if (kind == WalkKind::symmetric)
    for (double b : beta_grid)
      if (b != 0.0)
        throw error(errc::config, "symmetric walk requires a beta grid of zeros");
  for (double b : beta_grid) walk_at(b).validate();
}

namespace {

WalkKind kind_from_string(const std::string& s) {
  if (s == "merw") return WalkKind::merw;
  if (s == "biased_srw" || s == "srw") return WalkKind::biased_srw;
  if (s == "symmetric") return WalkKind::symmetric;
  throw error(errc::config, "unknown walk kind '" + s + "'");
}

std::string kind_to_string(WalkKind k) {
  switch (k) {
    case WalkKind::merw: return "merw";
    case WalkKind::biased_srw: return "biased_srw";
    case WalkKind::symmetric: return "symmetric";
  }
  return "?";
}

json m_to_json(const std::optional<std::uint32_t>& m) {
  if (m.has_value()) return json(*m);
  return json("inf");
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw error(errc::config, std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.d = j.value("d", c.d);
    if (j.contains("m")) {
      if (j["m"].is_string()) {
        const std::string s = j["m"];
        if (s != "inf" && s != "infinite")
          throw error(errc::config, "m must be an integer or \"inf\"");
        c.m.reset();
        c.kind = WalkKind::biased_srw;
      } else {
        c.m = j["m"].get<std::uint32_t>();
      }
    }
    if (j.contains("kind")) c.kind = kind_from_string(j["kind"]);
    if (!c.m.has_value()) c.kind = WalkKind::biased_srw;
    if (j.contains("beta_grid"))
      c.beta_grid = j["beta_grid"].get<std::vector<double>>();
    else if (j.contains("beta"))
      c.beta_grid = {j["beta"].get<double>()};
    c.n = j.value("n", c.n);
    c.replicates = j.value("replicates", c.replicates);
    c.seed = j.value("seed", c.seed);
    if (j.contains("estimators"))
      c.estimators = j["estimators"].get<std::vector<std::string>>();
    c.burnin = j.value("burnin", c.burnin);
    c.bit_exact = j.value("bit_exact", c.bit_exact);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.threads = j.value("threads", c.threads);
    if (j.contains("window_ks")) c.window_ks = j["window_ks"].get<std::vector<int>>();
    c.dump_cycles = j.value("dump_cycles", c.dump_cycles);
  } catch (const json::exception& e) {
    throw error(errc::config, std::string("bad config field: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

json config_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = 1;
  j["d"] = c.d;
  j["m"] = m_to_json(c.m);
  j["kind"] = kind_to_string(c.kind);
  j["beta_grid"] = c.beta_grid;
  j["n"] = c.n;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["estimators"] = c.estimators;
  j["burnin"] = c.burnin;
  j["bit_exact"] = c.bit_exact;
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  j["window_ks"] = c.window_ks;
  j["dump_cycles"] = c.dump_cycles;
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) {
  return config_json(config).dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io, "cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  ExperimentConfig c = config_from_json(text);
  const int version = json::parse(text).value("schema_version", 1);
  if (version != 1)
    throw error(errc::schema, "unsupported config schema_version " +
                                  std::to_string(version) + " in " + path);
  return c;
}

std::uint64_t replicate_seed(std::uint64_t master, const std::string& label,
                             std::int64_t index) {
  return derive_seed(master, label, static_cast<std::uint64_t>(index));
}

void parallel_for_replicates(std::int64_t count, int threads,
                             const std::function<void(std::int64_t)>& fn) {
  int n_threads = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = static_cast<int>(
      std::min<std::int64_t>(n_threads, std::max<std::int64_t>(count, 1)));
  if (n_threads == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::int64_t chunk = std::max<std::int64_t>(1, count / (n_threads * 16));
  auto worker = [&]() {
    while (true) {
      const std::int64_t begin = next.fetch_add(chunk);
      if (begin >= count) return;
      const std::int64_t end = std::min(begin + chunk, count);
      try {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

ReplicateRun run_replicate(const WalkParams& params, std::int64_t n,
                           std::uint64_t seed, const RunOptions& opts) {
  std::vector<std::int64_t> checkpoints = opts.checkpoints;
  if (checkpoints.empty()) checkpoints = {n};

  WalkSim sim(params, seed, opts.track_novelty);
  const double beta0 = params.beta;

  const int n_ks = static_cast<int>(opts.window_ks.size());
  const int max_k =
      n_ks ? *std::max_element(opts.window_ks.begin(), opts.window_ks.end()) : 0;
  // ring buffer of the last max_k+1 arrival points for window-novelty flags;
  // zero-init doubles as arrival 0 (the origin) in slot 0
  std::vector<std::int64_t> ring((max_k + 1) * params.d, 0);
  std::vector<std::int64_t> wsum(n_ks, 0);  // flags over arrivals <= t
  std::vector<std::uint8_t> wcur(n_ks, 1);

  double v = 0.0;  // score at beta0 over steps < t
  ReplicateRun out;
  out.at_checkpoints.reserve(checkpoints.size());
  if (n_ks) {
    for (int q = 0; q < n_ks; ++q) wsum[q] = 1;  // arrival 0 is fresh
  }

  std::size_t next_cp = 0;
  for (std::int64_t t = 0; t <= n; ++t) {
    if (next_cp < checkpoints.size() && t == checkpoints[next_cp]) {
      ReplicateStats st;
      const double tn = static_cast<double>(t);
      const std::int64_t e_t = sim.excited_arrivals() - (sim.excited() ? 1 : 0);
      st.x_over_n = sim.x() / tn;
      st.exc_over_n = e_t / tn;
      st.exc_score_over_n = e_t * v / tn;
      st.range_over_n = sim.novel_arrivals() / tn;
      out.at_checkpoints.push_back(st);
      for (int q = 0; q < n_ks; ++q)
        out.window_over_n.push_back((wsum[q] - wcur[q]) / tn);
      ++next_cp;
    }
    if (t == n) break;

    const bool flag = sim.excited();
    const std::int8_t eps = sim.step();
    if (flag && eps != 0) v += eps / (1.0 + beta0 * eps);

    if (n_ks) {
      const std::int64_t i = sim.time();
      auto pos = sim.position();
      // distance to the most recent arrival at the same site, capped at max_k
      int delta = max_k + 1;
      for (int back = 1; back <= std::min<std::int64_t>(i, max_k); ++back) {
        const std::int64_t* prev =
            ring.data() + ((i - back) % (max_k + 1)) * params.d;
        bool eq = true;
        for (int c = 0; c < params.d; ++c)
          if (prev[c] != pos[c]) { eq = false; break; }
        if (eq) { delta = back; break; }
      }
      std::copy(pos.begin(), pos.end(),
                ring.data() + (i % (max_k + 1)) * params.d);
      for (int q = 0; q < n_ks; ++q) {
        const int k = opts.window_ks[q];
        wcur[q] = (i <= k) ? (sim.novel() ? 1 : 0) : (delta > k ? 1 : 0);
        wsum[q] += wcur[q];
      }
    }
  }
  return out;
}

std::vector<Cycle> harvest_cycles(const WalkParams& params, std::int64_t horizon,
                                  std::uint64_t seed, std::int64_t confirm_margin) {
  WalkSim sim(params, seed);
  std::vector<std::int64_t> xs(horizon + 1);
  std::vector<std::int8_t> eps(horizon);
  std::vector<std::uint8_t> flags(horizon);
  xs[0] = 0;
  for (std::int64_t t = 0; t < horizon; ++t) {
    flags[t] = sim.excited();
    eps[t] = sim.step();
    xs[t + 1] = sim.x();
  }
  const RenewalRecord rec =
      detect_direct(std::span<const std::int64_t>(xs), confirm_margin);
  if (rec.taus.size() < 2) return {};
  return extract_cycles(std::span<const std::int64_t>(xs),
                        std::span<const std::int8_t>(eps),
                        std::span<const std::uint8_t>(flags), rec, params.beta);
}

namespace {

json params_json(const ExperimentConfig& c, double beta) {
  json p;
  p["d"] = c.d;
  p["m"] = m_to_json(c.m);
  p["beta"] = beta;
  p["n"] = c.n;
  return p;
}

bool wants(const ExperimentConfig& c, const std::string& name) {
  for (const auto& e : c.estimators)
    if (e == name) return true;
  return false;
}

}  // namespace

ExperimentResults run_experiment(const ExperimentConfig& config) {
  config.validate();
  const bool need_stats = wants(config, "speed_finite") ||
                          wants(config, "derivative_finite") ||
                          wants(config, "range_rate") ||
                          wants(config, "truncated_rate");
  const bool need_cycles =
      wants(config, "speed_regen") || wants(config, "derivative_regen");

  ExperimentResults results;
  results.config = config;

  for (double beta : config.beta_grid) {
    const WalkParams params = config.walk_at(beta);
    const std::string label = "b=" + std::to_string(beta);

    std::vector<ReplicateStats> stats(need_stats ? config.replicates : 0);
    std::vector<std::vector<double>> windows(
        need_stats ? config.replicates : 0);
    std::vector<std::vector<Cycle>> cycles(need_cycles ? config.replicates : 0);

    RunOptions opts;
    opts.window_ks = config.window_ks;
    parallel_for_replicates(
        config.replicates, config.threads, [&](std::int64_t i) {
          if (need_stats) {
            ReplicateRun run = run_replicate(
                params, config.n, replicate_seed(config.seed, label, i), opts);
            stats[i] = run.at_checkpoints.front();
            windows[i] = std::move(run.window_over_n);
          }
          if (need_cycles) {
            cycles[i] = harvest_cycles(
                params, config.n,
                replicate_seed(config.seed, label + "/cycles", i));
          }
        });

    GridPointResult point;
    point.beta = beta;

    std::vector<Cycle> pooled;
    if (need_cycles) {
      for (auto& cs : cycles)
        pooled.insert(pooled.end(), cs.begin(), cs.end());
      if (config.dump_cycles) {
        if (config.out_dir.empty() ||
            !std::filesystem::is_directory(config.out_dir))
          throw error(errc::io,
                      "dump_cycles needs an existing out_dir, got '" +
                          config.out_dir + "'");
        write_cycles_csv(pooled,
                         config.out_dir + "/cycles_" + label + ".csv");
      }
    }

    for (const auto& name : config.estimators) {
      if (name == "speed_finite") {
        auto pair = speed_finite_time(stats, params);
        point.estimates.push_back(pair.direct);
        point.estimates.push_back(pair.via_novelty);
      } else if (name == "derivative_finite") {
        point.estimates.push_back(derivative_finite_time(stats, params));
      } else if (name == "range_rate") {
        std::vector<double> r(stats.size());
        for (std::size_t i = 0; i < stats.size(); ++i) r[i] = stats[i].range_over_n;
        point.estimates.push_back(range_rate(r));
      } else if (name == "truncated_rate") {
        for (std::size_t q = 0; q < config.window_ks.size(); ++q) {
          std::vector<double> w(stats.size());
          for (std::size_t i = 0; i < stats.size(); ++i) w[i] = windows[i][q];
          point.estimates.push_back(truncated_rate(w, config.window_ks[q]));
        }
      } else if (name == "speed_regen") {
        point.estimates.push_back(speed_regenerative(pooled));
      } else if (name == "derivative_regen") {
        point.estimates.push_back(derivative_regenerative(
            pooled, params, 1000, derive_seed(config.seed, "bootstrap", 0)));
      }
    }
    results.grid.push_back(std::move(point));
  }
  return results;
}

std::string results_to_json(const ExperimentResults& results) {
  json j;
  j["schema_version"] = 1;
  // worker count is scheduling, not an experiment parameter; dropping it
  // keeps the document byte-identical across worker counts
  json cfg = config_json(results.config);
  cfg.erase("threads");
  j["config"] = cfg;
  json arr = json::array();
  for (const auto& point : results.grid) {
    for (const auto& e : point.estimates) {
      json r;
      r["observable"] = e.observable;
      r["params"] = params_json(results.config, point.beta);
      r["count"] = e.count;
      r["mean"] = e.mean;
      r["stderr"] = e.stderr_est;
      r["method"] = e.method;
      arr.push_back(r);
    }
  }
  j["results"] = arr;
  return j.dump(2);
}

void persist(const ExperimentResults& results) {
  const std::string& dir = results.config.out_dir;
  if (dir.empty()) throw error(errc::io, "config has no out_dir");
  if (!std::filesystem::is_directory(dir))
    throw error(errc::io, "output directory does not exist: " + dir);
  {
    std::ofstream out(dir + "/results.json");
    if (!out) throw error(errc::io, "cannot write " + dir + "/results.json");
    out << results_to_json(results) << "\n";
  }
  {
    std::ofstream out(dir + "/config.json");
    if (!out) throw error(errc::io, "cannot write " + dir + "/config.json");
    out << config_to_json(results.config) << "\n";
  }
}

}  // namespace erwlab
