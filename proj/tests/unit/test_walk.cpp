#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "erwlab/oracle.hpp"
#include "erwlab/rng.hpp"
#include "erwlab/walk.hpp"

using namespace erwlab;

TEST_CASE("step probabilities") {
  SUBCASE("excited d=2 beta=0.5") {
    auto p = step_probabilities(WalkParams::merw(2, 1, 0.5), true);
    CHECK(p[0] == doctest::Approx(0.375));
    CHECK(p[1] == doctest::Approx(0.125));
    CHECK(p[2] == doctest::Approx(0.25));
    CHECK(p[3] == doctest::Approx(0.25));
  }
  SUBCASE("beta=0 is uniform") {
    for (int d : {2, 3, 5}) {
      auto p = step_probabilities(WalkParams::merw(d, 1, 0.0), true);
      for (double q : p) CHECK(q == doctest::Approx(1.0 / (2 * d)));
    }
  }
  SUBCASE("beta=1 forbids left at excited sites") {
    auto p = step_probabilities(WalkParams::merw(2, 1, 1.0), true);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.0));
    CHECK(p[2] == doctest::Approx(0.25));
  }
  SUBCASE("normalization") {
    for (int d : {2, 4}) {
      for (bool exc : {false, true}) {
        auto p = step_probabilities(WalkParams::merw(d, 2, 0.73), exc);
        double s = 0;
        for (double q : p) s += q;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(WalkParams::merw(1, 1, 0.5).validate(), error);
  CHECK_THROWS_AS(WalkParams::merw(2, 1, 1.5).validate(), error);
  CHECK_THROWS_AS(WalkParams::merw(2, 0, 0.5).validate(), error);
  WalkParams sym = WalkParams::symmetric(2);
  sym.beta = 0.2;
  CHECK_THROWS_AS(sym.validate(), error);
}

TEST_CASE("empty walk") {
  auto t = simulate_trajectory(WalkParams::merw(2, 1, 0.5), 0, 7);
  CHECK(t.steps == 0);
  CHECK(t.xs.size() == 1);
  CHECK(t.xs[0] == 0);
  CHECK(t.novelty_count(0) == 0);  // empty sums are 0
  CHECK(t.novelty[0] == 1);
}

TEST_CASE("beta=1 never steps left from fresh sites") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto t = simulate_trajectory(WalkParams::merw(2, 1, 1.0), 10, seed);
    for (std::int64_t i = 0; i < t.steps; ++i)
      if (t.excited[i] && t.eps[i] != 0) CHECK(t.eps[i] == 1);
  }
}

TEST_CASE("novelty and excitation flags") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto t = simulate_trajectory(WalkParams::merw(3, 2, 0.4), 64, seed);
    CHECK(t.novelty[0] == 1);
    CHECK(t.novelty[1] == 1);  // a nearest-neighbor walk cannot return in one step
    for (std::int64_t i = 0; i <= t.steps; ++i)
      CHECK(t.novelty[i] <= t.excited[i]);
    auto t1 = simulate_trajectory(WalkParams::merw(3, 1, 0.4), 64, seed);
    for (std::int64_t i = 0; i <= t1.steps; ++i)
      CHECK(t1.novelty[i] == t1.excited[i]);
  }
}

TEST_CASE("novelty count is nondecreasing and at most n") {
  auto t = simulate_trajectory(WalkParams::merw(2, 1, 0.3), 500, 99);
  std::int64_t prev = 0;
  for (std::int64_t n = 0; n <= t.steps; ++n) {
    const std::int64_t cur = t.novelty_count(n);
    CHECK(cur >= prev);
    CHECK(cur <= n);
    prev = cur;
  }
}

TEST_CASE("determinism and prefix extension") {
  const WalkParams p = WalkParams::merw(2, 1, 0.5);
  auto a = simulate_trajectory(p, 300, 42);
  auto b = simulate_trajectory(p, 300, 42);
  CHECK(a.coords == b.coords);
  CHECK(a.eps == b.eps);
  auto longer = simulate_trajectory(p, 400, 42);
  for (std::size_t i = 0; i < a.xs.size(); ++i) CHECK(longer.xs[i] == a.xs[i]);
  auto other = simulate_trajectory(p, 300, 43);
  CHECK(a.xs != other.xs);
}

TEST_CASE("window novelty") {
  SUBCASE("straight line: all flags 1") {
    Trajectory line;
    line.d = 2;
    line.steps = 4;
    for (std::int64_t i = 0; i <= 4; ++i) {
      line.coords.push_back(i);
      line.coords.push_back(0);
      line.xs.push_back(i);
      line.novelty.push_back(1);
      line.excited.push_back(1);
      if (i < 4) line.eps.push_back(1);
    }
    for (int k : {1, 2, 3}) {
      auto flags = annotate_window_novelty(line, k);
      for (auto f : flags) CHECK(f == 1);
    }
  }
  SUBCASE("immediate backtrack") {
    // path 0, +e1, 0 in d = 2: Y_2 equals Y_0 inside a k = 2 window
    Trajectory t;
    t.d = 2;
    t.steps = 2;
    t.coords = {0, 0, 1, 0, 0, 0};
    t.xs = {0, 1, 0};
    t.eps = {1, -1};
    t.novelty = {1, 1, 0};
    t.excited = {1, 1, 0};
    auto f2 = annotate_window_novelty(t, 2);
    CHECK(f2[0] == 1);
    CHECK(f2[1] == 1);
    CHECK(f2[2] == 0);
    // k = 1 window only holds Y_1, which differs from Y_2
    auto f1 = annotate_window_novelty(t, 1);
    CHECK(f1[2] == 1);
  }
  SUBCASE("window flags dominate novelty and shrink with k") {
    auto t = simulate_trajectory(WalkParams::merw(2, 1, 0.2), 10000, 11);
    auto f4 = annotate_window_novelty(t, 4);
    auto f16 = annotate_window_novelty(t, 16);
    std::int64_t s4 = 0, s16 = 0, sn = 0;
    for (std::int64_t i = 0; i <= t.steps; ++i) {
      CHECK(f4[i] >= f16[i]);
      CHECK(f16[i] >= t.novelty[i]);
      s4 += f4[i];
      s16 += f16[i];
      sn += t.novelty[i];
    }
    CHECK(s4 >= s16);
    CHECK(s16 >= sn);
  }
  SUBCASE("k must be positive") {
    auto t = simulate_trajectory(WalkParams::merw(2, 1, 0.2), 5, 1);
    CHECK_THROWS_AS(annotate_window_novelty(t, 0), error);
  }
}

TEST_CASE("visit bookkeeping: mass and membership") {
  const WalkParams p = WalkParams::merw(2, 1, 0.5);
  auto t = simulate_trajectory(p, 200, 5);
  VisitMap vm;
  for (std::int64_t i = 0; i <= t.steps; ++i) vm.increment(pack_point(t.point(i)));
  CHECK(vm.total_mass() == static_cast<std::uint64_t>(t.steps + 1));
  CHECK(vm.distinct() == static_cast<std::size_t>(t.range_count(t.steps)));
  for (std::int64_t i = 0; i <= t.steps; ++i)
    CHECK(vm.count(pack_point(t.point(i))) >= 1);
}

TEST_CASE("biased srw keeps every arrival excited") {
  auto t = simulate_trajectory(WalkParams::biased_srw(2, 0.7), 100, 9);
  for (std::int64_t i = 0; i <= t.steps; ++i) CHECK(t.excited[i] == 1);
}

TEST_CASE("empirical path distribution matches the exact law") {
  // every 4-step d = 2 path within 4 standard errors of its exact probability
  const WalkParams p = WalkParams::merw(2, 1, 0.5);
  const int n = 4;
  const std::int64_t reps = 1'000'000;
  std::map<std::string, std::int64_t> counts;
  for (std::int64_t r = 0; r < reps; ++r) {
    auto t = simulate_trajectory(p, n, derive_seed(2024, "pathdist", r));
    std::string key;
    for (std::int64_t i = 0; i <= n; ++i)
      key += std::to_string(t.coords[2 * i]) + "," +
             std::to_string(t.coords[2 * i + 1]) + ";";
    ++counts[key];
  }
  double worst_z = 0.0;
  for (const auto& [key, c] : counts) {
    std::vector<std::int64_t> xs, zs;
    std::stringstream ss(key);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
      if (tok.empty()) continue;
      auto comma = tok.find(',');
      xs.push_back(std::stoll(tok.substr(0, comma)));
      zs.push_back(std::stoll(tok.substr(comma + 1)));
    }
    std::map<std::pair<std::int64_t, std::int64_t>, int> visits;
    double prob = 1.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const bool excited = visits[{xs[i], zs[i]}]++ == 0;
      const auto probs = step_probabilities(p, excited);
      const std::int64_t dx = xs[i + 1] - xs[i];
      if (dx == 1) prob *= probs[0];
      else if (dx == -1) prob *= probs[1];
      else prob *= probs[2];  // the two transverse moves are symmetric
    }
    const double expect = prob * reps;
    const double se = std::sqrt(reps * prob * (1.0 - prob));
    worst_z = std::max(worst_z, std::abs(c - expect) / se);
  }
  CHECK(worst_z < 4.0);
}

TEST_CASE("six-step path distribution matches the exact law") {
  // per-path z within 5 se (4096 paths: the 4-se bar alone would trip on
  // multiplicity), plus at least 99.8% of paths inside 4 se
  const WalkParams p = WalkParams::merw(2, 1, 0.5);
  const int n = 6;
  const std::int64_t reps = 2'000'000;
  std::map<std::string, std::int64_t> counts;
  for (std::int64_t r = 0; r < reps; ++r) {
    auto t = simulate_trajectory(p, n, derive_seed(2025, "pathdist6", r));
    std::string key;
    for (std::int64_t i = 0; i <= n; ++i)
      key += std::to_string(t.coords[2 * i]) + "," +
             std::to_string(t.coords[2 * i + 1]) + ";";
    ++counts[key];
  }
  double worst_z = 0.0;
  std::int64_t within4 = 0, total = 0;
  for (const auto& [key, c] : counts) {
    std::vector<std::int64_t> xs, zs;
    std::stringstream ss(key);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
      if (tok.empty()) continue;
      auto comma = tok.find(',');
      xs.push_back(std::stoll(tok.substr(0, comma)));
      zs.push_back(std::stoll(tok.substr(comma + 1)));
    }
    std::map<std::pair<std::int64_t, std::int64_t>, int> visits;
    double prob = 1.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const bool excited = visits[{xs[i], zs[i]}]++ == 0;
      const auto probs = step_probabilities(p, excited);
      const std::int64_t dx = xs[i + 1] - xs[i];
      if (dx == 1) prob *= probs[0];
      else if (dx == -1) prob *= probs[1];
      else prob *= probs[2];
    }
    const double z = std::abs(c - prob * reps) /
                     std::sqrt(reps * prob * (1.0 - prob));
    worst_z = std::max(worst_z, z);
    within4 += z < 4.0;
    ++total;
  }
  CHECK(worst_z < 5.0);
  CHECK(within4 >= total * 998 / 1000);
}

TEST_CASE("speed identity holds in monte carlo at n = 1000") {
  // E[X_n] = (beta/d) E[N_n] within 3 stderr for the one-cookie walk
  const WalkParams p = WalkParams::merw(2, 1, 0.5);
  const int reps = 4000;
  const std::int64_t n = 1000;
  double sx = 0, sx2 = 0;
  for (int r = 0; r < reps; ++r) {
    auto t = simulate_trajectory(p, n, derive_seed(77, "speedid", r));
    const double g =
        static_cast<double>(t.xs[n]) - p.beta / p.d * t.novelty_count(n);
    sx += g;
    sx2 += g * g;
  }
  const double mean = sx / reps;
  const double se = std::sqrt((sx2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean) < 3.0 * se);
}

TEST_CASE("trajectory csv format") {
  auto t = simulate_trajectory(WalkParams::merw(3, 1, 0.5), 10, 4);
  const std::string path = "test_traj.csv";
  write_trajectory_csv(t, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,x,z1,z2,eps,novel,excited");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
    ++rows;
  }
  CHECK(rows == 11);
  CHECK(last.substr(last.size() - 3) == ",,,");
  std::remove(path.c_str());
}
