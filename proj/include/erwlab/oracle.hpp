#ifndef ERWLAB_ORACLE_HPP
#define ERWLAB_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "erwlab/walk.hpp"

namespace erwlab {

// Brute-force enumeration of all (2d)^n paths with exact probabilities —
// the ground-truth engine behind every statistical identity in the library.

inline constexpr std::int64_t kDefaultAtomBudget = 100'000'000;

// Everything an observable may want about one enumerated path.
struct PathTerm {
  std::span<const std::int8_t> eps;       // n increments
  std::span<const std::uint8_t> novelty;  // n+1 arrival flags
  std::span<const std::uint8_t> excited;  // n+1 arrival flags
  std::int64_t x_n = 0;

  std::int64_t novelty_count() const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) s += novelty[i];
    return s;
  }
  std::int64_t excited_count() const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) s += excited[i];
    return s;
  }
  // score at beta0 with the walk's excitation flags
  double score(double beta0) const {
    double v = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (excited[i]) {
        const double e = eps[i];
        v += e / (1.0 + beta0 * e);
      }
    return v;
  }
  // likelihood ratio between biases for the walk's excitation flags
  long double weight(double beta, double beta0) const {
    long double m = 1.0L;
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (excited[i]) {
        const long double e = eps[i];
        m *= (1.0L + static_cast<long double>(beta) * e) /
             (1.0L + static_cast<long double>(beta0) * e);
      }
    return m;
  }
};

using PathObservable = std::function<double(const PathTerm&)>;

// E_beta[f] by total enumeration at params.beta.
double exact_expectation(const WalkParams& params, int n, const PathObservable& f,
                         std::int64_t budget = kDefaultAtomBudget);

// One enumeration, several bias values: returns E_{beta_j}[f(path, beta_j)].
std::vector<double> exact_expectation_grid(
    const WalkParams& params, std::span<const double> betas, int n,
    const std::function<double(const PathTerm&, double beta)>& f,
    std::int64_t budget = kDefaultAtomBudget);

struct SpeedDerivative {
  double v = 0.0;      // E[X_n]/n
  double dv_fd = 0.0;  // central (or one-sided at the edges) finite difference
};

SpeedDerivative exact_speed_and_derivative(const WalkParams& params, int n,
                                           double h, bool richardson = false,
                                           std::int64_t budget = kDefaultAtomBudget);

// The score-formula derivative (1/d)E[E_n]/n + (beta/d)E[E_n V_n]/n.
double exact_derivative_formula(const WalkParams& params, int n,
                                std::int64_t budget = kDefaultAtomBudget);

// Same derivative through E[X_n V_n]/n; an independent algebraic route.
double exact_derivative_xv(const WalkParams& params, int n,
                           std::int64_t budget = kDefaultAtomBudget);

// max over paths of |P_beta0(path) * M_n(path) - P_beta(path)|.
double girsanov_check(const WalkParams& params, double beta, double beta0, int n,
                      std::int64_t budget = kDefaultAtomBudget);

// ---- exact rational mode ----------------------------------------------

struct Frac {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / den; }
};

struct RationalCheck {
  bool exact = false;      // every path identity holds with zero discrepancy
  double max_abs = 0.0;    // largest |discrepancy| seen (0 when exact)
};

RationalCheck girsanov_check_rational(const WalkParams& params, Frac beta,
                                      Frac beta0, int n,
                                      std::int64_t budget = kDefaultAtomBudget);

// Exact E[f] for f in {1, X_n, N_n}; returns the reduced fraction as a string
// plus its double value.
struct RationalValue {
  std::string fraction;
  double value = 0.0;
};

enum class RationalObservable { one, x_n, n_n };

RationalValue exact_expectation_rational(const WalkParams& params, Frac beta,
                                         int n, RationalObservable obs,
                                         std::int64_t budget = kDefaultAtomBudget);

}  // namespace erwlab

#endif
