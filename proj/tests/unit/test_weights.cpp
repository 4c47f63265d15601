#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "erwlab/harness.hpp"
#include "erwlab/oracle.hpp"
#include "erwlab/renewal.hpp"
#include "erwlab/rng.hpp"
#include "erwlab/walk.hpp"
#include "erwlab/weights.hpp"

using namespace erwlab;

TEST_CASE("single-step accumulation") {
  SUBCASE("identity measure change") {
    WeightState s;
    for (std::int8_t e : {std::int8_t{1}, std::int8_t{-1}, std::int8_t{0}}) {
      s = accumulate(s, e, true, 0.5, 0.5);
      CHECK(s.log_m == 0.0);
    }
    CHECK(s.n == 3);
  }
  SUBCASE("right step at a fresh site") {
    auto s = accumulate(WeightState{}, 1, true, 0.5, 0.0);
    CHECK(std::exp(s.log_m) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(s.v_score == doctest::Approx(1.0));
  }
  SUBCASE("left step score at beta0 = 0.5") {
    auto s = accumulate(WeightState{}, -1, true, 0.5, 0.5);
    CHECK(s.v_score == doctest::Approx(-2.0));
  }
  SUBCASE("unflagged steps do not move the state") {
    auto s = accumulate(WeightState{}, -1, false, 0.9, 0.1);
    CHECK(s.log_m == 0.0);
    CHECK(s.v_score == 0.0);
  }
  SUBCASE("target law zero is exactly -inf") {
    auto s = accumulate(WeightState{}, -1, true, 1.0, 0.5);
    CHECK(std::isinf(s.log_m));
    CHECK(s.log_m < 0);
  }
  SUBCASE("reference law zero is an error") {
    try {
      accumulate(WeightState{}, -1, true, 0.5, 1.0);
      CHECK(false);
    } catch (const error& e) {
      CHECK(e.code == errc::undefined_weight);
    }
  }
}

TEST_CASE("score stays inside the deterministic envelope") {
  const double beta0 = 0.6;
  for (int r = 0; r < 20; ++r) {
    auto t = simulate_trajectory(WalkParams::merw(2, 1, beta0), 500,
                                 derive_seed(21, "envelope", r));
    auto s = weigh_path(t.eps, t.novelty, beta0, beta0);
    CHECK(std::abs(s.v_score) <= 500.0 / (1.0 - beta0) + 1e-9);
  }
}

TEST_CASE("cylinder-event change of measure is exact") {
  // sum over paths of P_beta0(path) M_n(path) 1_A equals P_beta(A)
  const int n = 5;
  const double beta = 0.7, beta0 = 0.2;
  const WalkParams at_beta0 = WalkParams::merw(2, 2, beta0);
  const WalkParams at_beta = WalkParams::merw(2, 2, beta);
  for (std::int64_t cut : {-1, 0, 1, 2, 3}) {
    auto indicator = [cut](const PathTerm& t) { return t.x_n == cut ? 1.0 : 0.0; };
    const double lhs = exact_expectation(at_beta0, n, [&](const PathTerm& t) {
      return indicator(t) * static_cast<double>(t.weight(beta, beta0));
    });
    const double rhs = exact_expectation(at_beta, n, indicator);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("score equals the bias derivative of the log weight") {
  // central finite differences of log M_n around beta0, pathwise
  const double h = 1e-5;
  int checked = 0;
  for (double beta0 : {0.3, 0.5}) {
    for (std::uint32_t m : {1u, 2u}) {
      const WalkParams p = WalkParams::merw(2, m, beta0);
      for (int r = 0; r < 25; ++r) {
        auto t = simulate_trajectory(p, 64, derive_seed(22, "scorefd", r));
        const auto& flags = m == 1 ? t.novelty : t.excited;
        const auto up = weigh_path(t.eps, flags, beta0 + h, beta0);
        const auto down = weigh_path(t.eps, flags, beta0 - h, beta0);
        const auto center = weigh_path(t.eps, flags, beta0, beta0);
        const double fd = (up.log_m - down.log_m) / (2.0 * h);
        const double tol = 1e-6 * std::max(1.0, std::abs(center.v_score));
        CHECK(std::abs(fd - center.v_score) < tol);
        ++checked;
      }
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("weights at renewal times") {
  SUBCASE("cycles without flagged steps have weight one") {
    Trajectory t;
    t.d = 2;
    t.steps = 4;
    t.xs = {0, 1, 2, 3, 4};
    t.eps = {1, 1, 1, 1};
    t.novelty = {1, 0, 0, 0, 0};  // handcrafted: nothing flagged after tau_1
    t.excited = t.novelty;
    RenewalRecord rec;
    rec.horizon = 4;
    rec.taus = {1, 2, 3};
    auto w = weight_at_tau(t, rec, 0.6, 0.5, FlagSource::novelty);
    REQUIRE(w.cycle_log_m.size() == 2);
    CHECK(w.cycle_log_m[0] == 0.0);
    CHECK(w.cycle_log_m[1] == 0.0);
  }
  SUBCASE("mean cycle weight is one") {
    // E-hat[M_tau(beta, beta0)] = 1 within 3 stderr; long paths keep the
    // finite-horizon cycle-selection bias negligible
    const double beta0 = 0.5, beta = 0.6;
    const WalkParams p = WalkParams::merw(2, 1, beta0);
    std::vector<double> weights;
    for (int r = 0; r < 8; ++r) {
      auto t = simulate_trajectory(p, 120000, derive_seed(23, "mtau", r));
      auto rec = detect_direct(t);
      if (rec.taus.size() < 2) continue;
      auto w = weight_at_tau(t, rec, beta, beta0, FlagSource::novelty);
      for (double lm : w.cycle_log_m) weights.push_back(std::exp(lm));
    }
    REQUIRE(weights.size() > 20000);
    double s = 0, s2 = 0;
    for (double w : weights) {
      s += w;
      s2 += w * w;
    }
    const double mean = s / weights.size();
    const double se =
        std::sqrt((s2 / weights.size() - mean * mean) / weights.size());
    CHECK(std::abs(mean - 1.0) < 3.0 * se);
  }
}

TEST_CASE("self-normalized reweighted mean") {
  SUBCASE("uniform weights give the arithmetic mean") {
    std::vector<double> f = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> lw(4, -2.5);
    auto r = reweighted_mean(f, lw);
    CHECK(r.mean == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(r.ess == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("single finite-weight sample returns its value") {
    std::vector<double> f = {3.25, 7.0};
    std::vector<double> lw = {-8.0, -std::numeric_limits<double>::infinity()};
    auto r = reweighted_mean(f, lw);
    CHECK(r.mean == doctest::Approx(3.25));
    CHECK(r.n_finite == 1);
  }
  SUBCASE("all weights zero is an error") {
    std::vector<double> f = {1.0, 2.0};
    std::vector<double> lw = {-std::numeric_limits<double>::infinity(),
                              -std::numeric_limits<double>::infinity()};
    try {
      reweighted_mean(f, lw);
      CHECK(false);
    } catch (const error& e) {
      CHECK(e.code == errc::all_weights_zero);
    }
  }
}

TEST_CASE("reweighting reproduces direct simulation") {
  // observable X_n/n at n = 1000 moved from beta0 = 0.4 to beta = 0.5
  const double beta0 = 0.4, beta = 0.5;
  const std::int64_t n = 1000;
  const std::int64_t reps = 60000;
  std::vector<double> values(reps), logw(reps);
  const WalkParams p0 = WalkParams::merw(2, 1, beta0);
  parallel_for_replicates(reps, 0, [&](std::int64_t r) {
    WalkSim sim(p0, derive_seed(24, "is", r));
    WeightState w;
    for (std::int64_t i = 0; i < n; ++i) {
      const bool flag = sim.excited();
      const std::int8_t e = sim.step();
      w = accumulate(w, e, flag, beta, beta0);
    }
    values[r] = static_cast<double>(sim.x()) / n;
    logw[r] = w.log_m;
  });
  const auto rw = reweighted_mean(values, logw);

  const std::int64_t direct_reps = 20000;
  std::vector<double> direct(direct_reps);
  const WalkParams p1 = WalkParams::merw(2, 1, beta);
  parallel_for_replicates(direct_reps, 0, [&](std::int64_t r) {
    WalkSim sim(p1, derive_seed(25, "directsim", r));
    for (std::int64_t i = 0; i < n; ++i) sim.step();
    direct[r] = static_cast<double>(sim.x()) / n;
  });
  double s = 0, s2 = 0;
  for (double v : direct) {
    s += v;
    s2 += v * v;
  }
  const double dmean = s / direct_reps;
  const double dse = std::sqrt((s2 / direct_reps - dmean * dmean) / direct_reps);
  const double band = 3.0 * std::sqrt(dse * dse + rw.stderr_est * rw.stderr_est);
  CHECK(std::abs(rw.mean - dmean) < band);
  CHECK(rw.ess > 30.0);
}
