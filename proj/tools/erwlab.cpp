// erwlab: simulation and estimation laboratory for excited random walks.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "erwlab/coupling.hpp"
#include "erwlab/harness.hpp"
#include "erwlab/oracle.hpp"
#include "erwlab/renewal.hpp"
#include "erwlab/walk.hpp"
#include "erwlab/weights.hpp"

using namespace erwlab;
using nlohmann::json;

namespace {

struct WalkFlags {
  int d = 2;
  std::string m = "1";
  double beta = 0.5;
  std::string kind = "merw";
};

void add_walk_flags(CLI::App* cmd, WalkFlags& w) {
  cmd->add_option("--d", w.d, "lattice dimension (>= 2)");
  cmd->add_option("--m", w.m, "excitation threshold, integer or 'inf'");
  cmd->add_option("--beta", w.beta, "bias in [0, 1]");
  cmd->add_option("--kind", w.kind, "walk kind: merw | srw | symmetric");
}

WalkParams to_params(const WalkFlags& w) {
  if (w.kind == "symmetric") return WalkParams::symmetric(w.d);
  if (w.kind == "srw" || w.kind == "biased_srw" || w.m == "inf" || w.m == "infinite")
    return WalkParams::biased_srw(w.d, w.beta);
  if (w.kind != "merw") throw error(errc::config, "unknown --kind " + w.kind);
  return WalkParams::merw(w.d, static_cast<std::uint32_t>(std::stoul(w.m)), w.beta);
}

Frac parse_frac(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos)
    throw error(errc::config, "rational values use the form p/q, got " + s);
  return Frac{std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))};
}

void print_results(const ExperimentResults& results, const std::string& format) {
  if (format == "csv") {
    std::printf("observable,beta,n,count,mean,stderr,method\n");
    for (const auto& point : results.grid)
      for (const auto& e : point.estimates)
        std::printf("%s,%.17g,%lld,%lld,%.17g,%.17g,%s\n", e.observable.c_str(),
                    point.beta, static_cast<long long>(results.config.n),
                    static_cast<long long>(e.count), e.mean, e.stderr_est,
                    e.method.c_str());
  } else {
    std::printf("%s\n", results_to_json(results).c_str());
  }
}

int run_simulate(const WalkFlags& w, std::int64_t steps, std::uint64_t seed,
                 const std::string& out) {
  auto traj = simulate_trajectory(to_params(w), steps, seed);
  write_trajectory_csv(traj, out);
  std::fprintf(stderr, "wrote %lld steps to %s\n", static_cast<long long>(steps),
               out.c_str());
  return 0;
}

int run_estimate(const std::string& what, ExperimentConfig config,
                 const std::string& format) {
  if (what == "speed")
    config.estimators = {"speed_finite", "speed_regen"};
  else if (what == "derivative")
    config.estimators = {"derivative_finite", "derivative_regen"};
  else if (what == "range")
    config.estimators = {"range_rate"};
  else
    throw error(errc::config, "estimate target must be speed, derivative or range");
  auto results = run_experiment(config);
  print_results(results, format);
  if (!config.out_dir.empty()) persist(results);
  return 0;
}

int run_renewal_stats(const WalkFlags& w, std::int64_t horizon,
                      std::int64_t replicates, std::uint64_t seed,
                      const std::string& out, double weight_beta,
                      const std::string& weights_out) {
  const WalkParams params = to_params(w);
  std::vector<std::vector<Cycle>> per(replicates);
  std::vector<WeightState> states(weights_out.empty() ? 0 : replicates);
  parallel_for_replicates(replicates, 0, [&](std::int64_t r) {
    per[r] = harvest_cycles(params, horizon, derive_seed(seed, "renewal-stats", r));
    if (!weights_out.empty()) {
      auto t = simulate_trajectory(params, horizon,
                                   derive_seed(seed, "renewal-stats/w", r));
      states[r] = weigh_path(t.eps, t.excited, weight_beta, params.beta);
    }
  });
  if (!weights_out.empty()) write_weights_csv(states, weights_out);
  std::vector<Cycle> cycles;
  for (auto& cs : per) cycles.insert(cycles.end(), cs.begin(), cs.end());
  if (!out.empty()) write_cycles_csv(cycles, out);

  json j;
  j["cycles"] = cycles.size();
  if (!cycles.empty()) {
    double st = 0, sx = 0;
    std::int64_t max_dt = 0;
    for (const auto& c : cycles) {
      st += static_cast<double>(c.dt);
      sx += static_cast<double>(c.dx);
      max_dt = std::max(max_dt, c.dt);
    }
    j["mean_dt"] = st / cycles.size();
    j["mean_dx"] = sx / cycles.size();
    j["speed"] = sx / st;
    json tail = json::array();
    for (std::int64_t t = 1; t <= max_dt; t *= 2) {
      std::int64_t c = 0;
      for (const auto& cy : cycles) c += cy.dt > t;
      tail.push_back(
          {{"t", t}, {"p_dt_gt_t", static_cast<double>(c) / cycles.size()}});
    }
    j["tail"] = tail;
  }
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

int run_coupling_check(int d, double beta0, double beta,
                       std::vector<std::uint32_t> ms, std::int64_t horizon,
                       std::int64_t replicates, std::uint64_t seed,
                       std::int64_t burnin, const std::string& dump) {
  if (burnin < 0) burnin = default_burnin(horizon);
  bool all_ok = true;
  json report = json::array();
  for (std::uint32_t m : ms) {
    std::vector<std::uint8_t> dom(replicates), shared(replicates);
    std::vector<std::int64_t> checked(replicates);
    parallel_for_replicates(replicates, 0, [&](std::int64_t r) {
      auto noise =
          sample_noise(d, beta0, beta, horizon, burnin,
                       derive_seed(seed, "coupling/m" + std::to_string(m), r));
      auto pair = build_pair(noise, m);
      auto rep = verify(pair);
      dom[r] = rep.dominance_ok;
      shared[r] = rep.shared_renewals_ok;
      checked[r] = rep.renewals_checked;
      if (r == 0 && !dump.empty())
        write_coupled_csv(pair, noise, dump + ".m" + std::to_string(m) + ".csv");
    });
    std::int64_t dom_fail = 0, shared_fail = 0, renewals = 0;
    for (std::int64_t r = 0; r < replicates; ++r) {
      dom_fail += dom[r] == 0;
      shared_fail += shared[r] == 0;
      renewals += checked[r];
    }
    all_ok = all_ok && dom_fail == 0 && shared_fail == 0;
    report.push_back({{"m", m},
                      {"replicates", replicates},
                      {"dominance_violations", dom_fail},
                      {"shared_renewal_violations", shared_fail},
                      {"renewals_checked", renewals}});
    std::fprintf(stderr, "m=%u: dominance %s, shared renewals %s (%lld checked)\n",
                 m, dom_fail ? "FAIL" : "ok", shared_fail ? "FAIL" : "ok",
                 static_cast<long long>(renewals));
  }
  json j;
  j["pass"] = all_ok;
  j["checks"] = report;
  std::printf("%s\n", j.dump(2).c_str());
  return all_ok ? 0 : 3;
}

int run_range_scan(int d, std::vector<double> betas, std::int64_t n,
                   std::int64_t replicates, std::uint64_t seed,
                   const std::string& format) {
  ExperimentConfig c;
  c.d = d;
  c.m.reset();
  c.kind = WalkKind::biased_srw;
  c.beta_grid = std::move(betas);
  c.n = n;
  c.replicates = replicates;
  c.seed = seed;
  c.estimators = {"range_rate"};
  auto results = run_experiment(c);
  print_results(results, format);
  return 0;
}

int run_oracle(CLI::App* cmd, const WalkFlags& w, int n, double beta0, double h,
               bool richardson, const std::string& rational,
               const std::string& rational0, const std::string& obs,
               std::int64_t budget) {
  json j;
  const std::string sub = cmd->get_name();
  if (sub == "expectation") {
    const WalkParams p = to_params(w);
    if (!rational.empty()) {
      RationalObservable ro = RationalObservable::x_n;
      if (obs == "one") ro = RationalObservable::one;
      else if (obs == "n") ro = RationalObservable::n_n;
      else if (obs != "x") throw error(errc::config, "--obs must be one|x|n");
      auto r = exact_expectation_rational(p, parse_frac(rational), n, ro, budget);
      j["fraction"] = r.fraction;
      j["value"] = r.value;
    } else {
      PathObservable f;
      if (obs == "one") f = [](const PathTerm&) { return 1.0; };
      else if (obs == "x") f = [](const PathTerm& t) { return double(t.x_n); };
      else if (obs == "n")
        f = [](const PathTerm& t) { return double(t.novelty_count()); };
      else throw error(errc::config, "--obs must be one|x|n");
      j["value"] = exact_expectation(p, n, f, budget);
    }
    j["observable"] = obs;
  } else if (sub == "speed") {
    const WalkParams p = to_params(w);
    auto sd = exact_speed_and_derivative(p, n, h, richardson, budget);
    j["v_n"] = sd.v;
    j["dv_fd"] = sd.dv_fd;
    j["dv_formula"] = exact_derivative_formula(p, n, budget);
  } else if (sub == "girsanov") {
    const WalkParams p = to_params(w);
    if (!rational.empty() || !rational0.empty()) {
      if (rational.empty() || rational0.empty())
        throw error(
            errc::config,
            "rational girsanov needs both --rational-beta and --rational-beta0");
      auto r = girsanov_check_rational(p, parse_frac(rational),
                                       parse_frac(rational0), n, budget);
      j["exact"] = r.exact;
      j["max_discrepancy"] = r.max_abs;
    } else {
      j["max_discrepancy"] = girsanov_check(p, w.beta, beta0, n, budget);
    }
    j["beta"] = w.beta;
    j["beta0"] = beta0;
  }
  j["n"] = n;
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"excited random walk laboratory"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "simulate one walk and dump a CSV");
  WalkFlags sim_w;
  std::int64_t sim_steps = 1000;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "trajectory.csv";
  add_walk_flags(sim, sim_w);
  sim->add_option("--steps", sim_steps, "number of steps");
  sim->add_option("--seed", sim_seed, "seed");
  sim->add_option("--out", sim_out, "output CSV path");

  auto* est = app.add_subcommand("estimate", "run estimators over a beta grid");
  std::string est_what = "speed";
  est->add_option("what", est_what, "speed | derivative | range")->required();
  WalkFlags est_w;
  add_walk_flags(est, est_w);
  std::vector<double> est_grid;
  std::int64_t est_n = 10000, est_reps = 1000;
  std::uint64_t est_seed = 1;
  int est_threads = 0;
  std::string est_config, est_out_dir, est_format = "json";
  std::int64_t est_burnin = -1;
  bool est_bit_exact = true;
  est->add_option("--beta-grid", est_grid, "beta values (overrides --beta)");
  est->add_option("--n", est_n, "horizon");
  est->add_option("--replicates", est_reps, "replicates per grid point");
  est->add_option("--seed", est_seed, "master seed");
  est->add_option("--threads", est_threads, "worker threads (0 = all)");
  est->add_option("--config", est_config, "JSON config file; flags override");
  est->add_option("--out-dir", est_out_dir, "directory for results.json");
  est->add_option("--format", est_format, "json | csv");
  est->add_option("--burnin", est_burnin, "coupling burn-in");
  est->add_flag("--bit-exact,!--no-bit-exact", est_bit_exact,
                "deterministic ordered reduction");

  auto* ren = app.add_subcommand("renewal-stats", "harvest cycles and tail stats");
  WalkFlags ren_w;
  add_walk_flags(ren, ren_w);
  std::int64_t ren_horizon = 10000, ren_reps = 100;
  std::uint64_t ren_seed = 1;
  std::string ren_out;
  ren->add_option("--horizon", ren_horizon, "path length per replicate");
  ren->add_option("--replicates", ren_reps, "paths");
  ren->add_option("--seed", ren_seed, "master seed");
  ren->add_option("--out", ren_out, "cycle CSV path");
  double ren_wbeta = 0.5;
  std::string ren_wout;
  ren->add_option("--weight-beta", ren_wbeta, "target bias for path weights");
  ren->add_option("--weights-out", ren_wout, "per-replicate weight CSV path");

  auto* cpl =
      app.add_subcommand("coupling-check", "verify dominance and shared renewals");
  int cpl_d = 4;
  double cpl_beta0 = 0.3, cpl_beta = 0.5;
  std::vector<std::uint32_t> cpl_ms = {1};
  std::int64_t cpl_horizon = 10000, cpl_reps = 100, cpl_burnin = -1;
  std::uint64_t cpl_seed = 1;
  std::string cpl_dump;
  cpl->add_option("--d", cpl_d, "lattice dimension");
  cpl->add_option("--beta0", cpl_beta0, "stationary-walk bias");
  cpl->add_option("--beta", cpl_beta, "m-ERW bias (>= beta0)");
  cpl->add_option("--m", cpl_ms, "excitation thresholds to sweep");
  cpl->add_option("--horizon", cpl_horizon, "steps per pair");
  cpl->add_option("--replicates", cpl_reps, "pairs per m");
  cpl->add_option("--seed", cpl_seed, "master seed");
  cpl->add_option("--burnin", cpl_burnin, "negative-time history (-1 = default)");
  cpl->add_option("--dump", cpl_dump, "CSV prefix for the first pair per m");

  auto* rng_scan = app.add_subcommand("range-scan", "distinct-site rate per beta");
  int rs_d = 3;
  std::vector<double> rs_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::int64_t rs_n = 100000, rs_reps = 1000;
  std::uint64_t rs_seed = 1;
  std::string rs_format = "json";
  rng_scan->add_option("--d", rs_d, "lattice dimension");
  rng_scan->add_option("--beta-grid", rs_grid, "beta values");
  rng_scan->add_option("--n", rs_n, "horizon");
  rng_scan->add_option("--replicates", rs_reps, "replicates per beta");
  rng_scan->add_option("--seed", rs_seed, "master seed");
  rng_scan->add_option("--format", rs_format, "json | csv");

  auto* orc = app.add_subcommand("oracle", "exact enumeration checks");
  orc->require_subcommand(1);
  WalkFlags orc_w;
  int orc_n = 4;
  double orc_beta0 = 0.0, orc_h = 1e-4;
  bool orc_rich = false;
  std::string orc_rat, orc_rat0, orc_obs = "x";
  std::int64_t orc_budget = kDefaultAtomBudget;
  for (const char* name : {"expectation", "speed", "girsanov"}) {
    auto* sub = orc->add_subcommand(name);
    add_walk_flags(sub, orc_w);
    sub->add_option("--n", orc_n, "path length");
    sub->add_option("--budget", orc_budget, "max enumerated paths");
    if (std::string(name) == "expectation") {
      sub->add_option("--obs", orc_obs, "one | x | n");
      sub->add_option("--rational", orc_rat, "exact mode, beta as p/q");
    }
    if (std::string(name) == "speed") {
      sub->add_option("--fd-step", orc_h, "finite-difference step");
      sub->add_flag("--richardson", orc_rich, "extrapolated difference");
    }
    if (std::string(name) == "girsanov") {
      sub->add_option("--beta0", orc_beta0, "reference bias");
      sub->add_option("--rational-beta", orc_rat, "exact mode target bias p/q");
      sub->add_option("--rational-beta0", orc_rat0, "exact mode reference bias p/q");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_w, sim_steps, sim_seed, sim_out);
    if (est->parsed()) {
      ExperimentConfig config;
      if (!est_config.empty()) config = load_config(est_config);
      // explicit flags override config-file values
      if (est->count("--d")) config.d = est_w.d;
      if (est->count("--m")) {
        if (est_w.m == "inf" || est_w.m == "infinite") {
          config.m.reset();
          config.kind = WalkKind::biased_srw;
        } else {
          config.m = static_cast<std::uint32_t>(std::stoul(est_w.m));
        }
      }
      if (est->count("--kind")) {
        if (est_w.kind == "merw") config.kind = WalkKind::merw;
        else if (est_w.kind == "srw" || est_w.kind == "biased_srw")
          config.kind = WalkKind::biased_srw;
        else if (est_w.kind == "symmetric") config.kind = WalkKind::symmetric;
        else throw error(errc::config, "unknown --kind " + est_w.kind);
      }
      if (est->count("--beta-grid")) config.beta_grid = est_grid;
      else if (est->count("--beta")) config.beta_grid = {est_w.beta};
      if (est->count("--n")) config.n = est_n;
      if (est->count("--replicates")) config.replicates = est_reps;
      if (est->count("--seed")) config.seed = est_seed;
      if (est->count("--threads")) config.threads = est_threads;
      if (est->count("--out-dir")) config.out_dir = est_out_dir;
      if (est->count("--burnin")) config.burnin = est_burnin;
      if (est->count("--bit-exact") || est->count("--no-bit-exact"))
        config.bit_exact = est_bit_exact;
      return run_estimate(est_what, config, est_format);
    }
    if (ren->parsed())
      return run_renewal_stats(ren_w, ren_horizon, ren_reps, ren_seed, ren_out,
                               ren_wbeta, ren_wout);
    if (cpl->parsed())
      return run_coupling_check(cpl_d, cpl_beta0, cpl_beta, cpl_ms, cpl_horizon,
                                cpl_reps, cpl_seed, cpl_burnin, cpl_dump);
    if (rng_scan->parsed())
      return run_range_scan(rs_d, rs_grid, rs_n, rs_reps, rs_seed, rs_format);
    if (orc->parsed()) {
      for (auto* sub : orc->get_subcommands())
        return run_oracle(sub, orc_w, orc_n, orc_beta0, orc_h, orc_rich, orc_rat,
                          orc_rat0, orc_obs, orc_budget);
    }
  } catch (const error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code == errc::config || e.code == errc::schema ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
