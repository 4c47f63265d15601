#include "erwlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "erwlab/visit_map.hpp"

namespace erwlab {

namespace {

std::int64_t atom_count(int d, int n, std::int64_t budget) {
  long double atoms = 1.0L;
  for (int i = 0; i < n; ++i) atoms *= 2 * d;
  if (atoms > static_cast<long double>(budget))
    throw error(errc::budget_exceeded,
                "(2d)^n exceeds the enumeration budget of " + std::to_string(budget) +
                    " atoms");
  return static_cast<std::int64_t>(atoms);
}

struct KeyHash {
  std::size_t operator()(const Key128& k) const { return hash_key(k); }
};

// Exact rational on __int128, normalized after every operation.
struct Rat {
  __int128 num = 0;
  __int128 den = 1;

  Rat() = default;
  Rat(__int128 n, __int128 d) : num(n), den(d) {}

  static __int128 gcd(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rat make(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 g = gcd(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    return Rat{n, d == 0 ? 1 : d};
  }

  static __int128 checked_mul(__int128 a, __int128 b) {
    __int128 r;
    if (__builtin_mul_overflow(a, b, &r))
      throw error(errc::budget_exceeded,
                  "rational magnitude overflow; reduce n or the denominators");
    return r;
  }

  Rat operator*(const Rat& o) const {
    // cross-cancel before multiplying to keep magnitudes small
    __int128 g1 = gcd(num, o.den), g2 = gcd(o.num, den);
    return Rat{checked_mul(num / (g1 ? g1 : 1), o.num / (g2 ? g2 : 1)),
               checked_mul(den / (g2 ? g2 : 1), o.den / (g1 ? g1 : 1))};
  }
  Rat operator+(const Rat& o) const {
    __int128 g = gcd(den, o.den);
    __int128 l = checked_mul(den / (g ? g : 1), o.den);
    __int128 n = checked_mul(num, o.den / (g ? g : 1));
    __int128 m = checked_mul(o.num, den / (g ? g : 1));
    if (__builtin_add_overflow(n, m, &n))
      throw error(errc::budget_exceeded, "rational magnitude overflow in sum");
    return make(n, l);
  }
  Rat operator-(const Rat& o) const { return *this + Rat{-o.num, o.den}; }
  bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
  bool is_zero() const { return num == 0; }

  double to_double() const {
    return static_cast<double>(static_cast<long double>(num) /
                               static_cast<long double>(den));
  }
  std::string str() const {
    auto i128_str = [](__int128 v) {
      if (v == 0) return std::string("0");
      bool neg = v < 0;
      unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v)
                                : static_cast<unsigned __int128>(v);
      std::string s;
      while (u) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
      }
      if (neg) s.push_back('-');
      std::reverse(s.begin(), s.end());
      return s;
    };
    return i128_str(num) + "/" + i128_str(den);
  }
};

// Depth-first enumeration with incremental visit-count undo. Scalar is
// long double (compensated float mode) or Rat (exact mode); one probability
// stack per bias value.
template <class Scalar, class Leaf>
void enumerate_paths(const WalkParams& base, std::span<const Scalar> bias_factors_up,
                     std::span<const Scalar> bias_factors_down,
                     const Scalar& uniform_factor, const Scalar& one, int n,
                     Leaf&& leaf) {
  const int d = base.d;
  const int n_moves = 2 * d;
  const std::size_t n_betas = bias_factors_up.size();

  std::vector<std::int64_t> pos(d, 0);
  std::vector<std::int8_t> eps(std::max(n, 1), 0);
  std::vector<std::uint8_t> novelty(n + 1, 0);
  std::vector<std::uint8_t> excited(n + 1, 0);
  std::vector<Scalar> probs((n + 1) * n_betas, one);
  std::unordered_map<Key128, std::uint32_t, KeyHash> counts;
  std::vector<std::int8_t> move(std::max(n, 1), 0);

  novelty[0] = 1;
  excited[0] = 1;
  counts[pack_point(std::span<const std::int64_t>(pos))] = 1;
  std::int64_t x = 0;

  int depth = 0;
  while (depth >= 0) {
    if (depth == n) {
      PathTerm term;
      term.eps = {eps.data(), static_cast<std::size_t>(n)};
      term.novelty = {novelty.data(), static_cast<std::size_t>(n + 1)};
      term.excited = {excited.data(), static_cast<std::size_t>(n + 1)};
      term.x_n = x;
      leaf(term, std::span<const Scalar>(probs.data() + depth * n_betas, n_betas));
      --depth;
      continue;
    }
    const std::int8_t j = move[depth];
    if (j > 0) {
      // undo move j-1
      const int prev_axis = (j - 1) >> 1;
      const std::int64_t prev_delta = ((j - 1) & 1) ? -1 : +1;
      auto it = counts.find(pack_point(std::span<const std::int64_t>(pos)));
      if (--it->second == 0) counts.erase(it);
      pos[prev_axis] -= prev_delta;
      if (prev_axis == 0) x -= prev_delta;
    }
    if (j == n_moves) {
      --depth;
      continue;
    }
    ++move[depth];
    const int axis = j >> 1;
    const std::int64_t delta = (j & 1) ? -1 : +1;
    const bool exc = excited[depth] != 0;
    for (std::size_t b = 0; b < n_betas; ++b) {
      const Scalar* f = &uniform_factor;
      if (exc && axis == 0) f = delta > 0 ? &bias_factors_up[b] : &bias_factors_down[b];
      probs[(depth + 1) * n_betas + b] = probs[depth * n_betas + b] * (*f);
    }
    pos[axis] += delta;
    if (axis == 0) x += delta;
    std::uint32_t& c = counts[pack_point(std::span<const std::int64_t>(pos))];
    const std::uint32_t prior = c++;
    eps[depth] = axis == 0 ? static_cast<std::int8_t>(delta) : std::int8_t{0};
    novelty[depth + 1] = prior == 0;
    excited[depth + 1] = base.always_excited() || prior < base.m;
    ++depth;
    if (depth < n) move[depth] = 0;
  }
}

struct Kahan {
  long double sum = 0.0L, c = 0.0L;
  void add(long double x) {
    long double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  long double value() const { return sum + c; }
};

void float_factors(const WalkParams& p, std::span<const double> betas,
                   std::vector<long double>& up, std::vector<long double>& down,
                   long double& uni) {
  const long double inv = 1.0L / (2.0L * p.d);
  uni = inv;
  for (double b : betas) {
    up.push_back((1.0L + static_cast<long double>(b)) * inv);
    down.push_back((1.0L - static_cast<long double>(b)) * inv);
  }
}

}  // namespace

std::vector<double> exact_expectation_grid(
    const WalkParams& params, std::span<const double> betas, int n,
    const std::function<double(const PathTerm&, double beta)>& f,
    std::int64_t budget) {
  params.validate();
  if (n < 0) throw error(errc::config, "n must be >= 0");
  atom_count(params.d, n, budget);
  std::vector<long double> up, down;
  long double uni = 0.0L;
  float_factors(params, betas, up, down, uni);
  std::vector<Kahan> acc(betas.size());
  enumerate_paths<long double>(
      params, up, down, uni, 1.0L, n,
      [&](const PathTerm& term, std::span<const long double> probs) {
        for (std::size_t b = 0; b < betas.size(); ++b)
          acc[b].add(probs[b] * static_cast<long double>(f(term, betas[b])));
      });
  std::vector<double> out;
  out.reserve(betas.size());
  for (auto& a : acc) out.push_back(static_cast<double>(a.value()));
  return out;
}

double exact_expectation(const WalkParams& params, int n, const PathObservable& f,
                         std::int64_t budget) {
  const double betas[1] = {params.beta};
  auto r = exact_expectation_grid(
      params, betas, n, [&](const PathTerm& t, double) { return f(t); }, budget);
  return r[0];
}

SpeedDerivative exact_speed_and_derivative(const WalkParams& params, int n,
                                           double h, bool richardson,
                                           std::int64_t budget) {
  params.validate();
  if (n < 1) throw error(errc::config, "n must be >= 1");
  if (h <= 0.0) throw error(errc::config, "h must be > 0");
  const double b = params.beta;
  const bool interior = b > 0.0 && b < 1.0;
  if (interior && h >= std::min(b, 1.0 - b))
    throw error(errc::config, "h must be < min(beta, 1-beta) in the interior");

  auto mean_x = [&](std::span<const double> betas) {
    return exact_expectation_grid(
        params, betas, n,
        [](const PathTerm& t, double) { return static_cast<double>(t.x_n); },
        budget);
  };

  SpeedDerivative out;
  auto fd_at = [&](double step) -> double {
    if (interior) {
      const double bs[2] = {b - step, b + step};
      auto v = mean_x(bs);
      return (v[1] - v[0]) / (2.0 * step * n);
    }
    const double sign = b == 0.0 ? 1.0 : -1.0;
    const double bs[2] = {b, b + sign * step};
    auto v = mean_x(bs);
    return sign * (v[1] - v[0]) / (step * n);
  };

  const double bs[1] = {b};
  out.v = mean_x(bs)[0] / n;
  if (richardson)
    out.dv_fd = (4.0 * fd_at(h / 2.0) - fd_at(h)) / 3.0;
  else
    out.dv_fd = fd_at(h);
  return out;
}

double exact_derivative_formula(const WalkParams& params, int n, std::int64_t budget) {
  params.validate();
  if (n < 1) throw error(errc::config, "n must be >= 1");
  const double beta = params.beta;
  const double bs[1] = {beta};
  auto e = exact_expectation_grid(
      params, bs, n,
      [&](const PathTerm& t, double b) {
        const double en = static_cast<double>(t.excited_count());
        return en / n + b * en * t.score(b) / n;
      },
      budget);
  return e[0] / params.d;
}

double exact_derivative_xv(const WalkParams& params, int n, std::int64_t budget) {
  params.validate();
  const double bs[1] = {params.beta};
  auto e = exact_expectation_grid(
      params, bs, n,
      [&](const PathTerm& t, double b) {
        return static_cast<double>(t.x_n) * t.score(b) / n;
      },
      budget);
  return e[0];
}

double girsanov_check(const WalkParams& params, double beta, double beta0, int n,
                      std::int64_t budget) {
  params.validate();
  atom_count(params.d, n, budget);
  const double bs[2] = {beta0, beta};
  std::vector<long double> up, down;
  long double uni = 0.0L;
  float_factors(params, bs, up, down, uni);
  long double worst = 0.0L;
  enumerate_paths<long double>(
      params, up, down, uni, 1.0L, n,
      [&](const PathTerm& term, std::span<const long double> probs) {
        const long double lhs = probs[0] * term.weight(beta, beta0);
        const long double diff = std::abs(lhs - probs[1]);
        worst = std::max(worst, diff);
      });
  return static_cast<double>(worst);
}

RationalCheck girsanov_check_rational(const WalkParams& params, Frac beta,
                                      Frac beta0, int n, std::int64_t budget) {
  params.validate();
  if (beta.den <= 0 || beta0.den <= 0)
    throw error(errc::config, "fraction denominators must be positive");
  atom_count(params.d, n, budget);
  const int twod = 2 * params.d;
  std::vector<Rat> up = {Rat::make(beta0.den + beta0.num, twod * beta0.den),
                         Rat::make(beta.den + beta.num, twod * beta.den)};
  std::vector<Rat> down = {Rat::make(beta0.den - beta0.num, twod * beta0.den),
                           Rat::make(beta.den - beta.num, twod * beta.den)};
  const Rat uni = Rat::make(1, twod);

  const Rat rb = Rat::make(beta.num, beta.den);
  const Rat rb0 = Rat::make(beta0.num, beta0.den);
  const Rat one = Rat::make(1, 1);

  RationalCheck out;
  out.exact = true;
  enumerate_paths<Rat>(
      params, up, down, uni, one, n,
      [&](const PathTerm& term, std::span<const Rat> probs) {
        Rat m = one;
        for (std::size_t i = 0; i < term.eps.size(); ++i) {
          if (!term.excited[i] || term.eps[i] == 0) continue;
          const Rat e = Rat::make(term.eps[i], 1);
          const Rat numer = one + rb * e;
          const Rat denom = one + rb0 * e;
          if (denom.is_zero())
            throw error(errc::undefined_weight, "reference bias 1 with a left step");
          m = m * numer * Rat::make(denom.den, denom.num);
        }
        const Rat diff = probs[0] * m - probs[1];
        if (!diff.is_zero()) {
          out.exact = false;
          out.max_abs = std::max(out.max_abs, std::abs(diff.to_double()));
        }
      });
  return out;
}

RationalValue exact_expectation_rational(const WalkParams& params, Frac beta,
                                         int n, RationalObservable obs,
                                         std::int64_t budget) {
  params.validate();
  if (beta.den <= 0) throw error(errc::config, "fraction denominator must be positive");
  atom_count(params.d, n, budget);
  const int twod = 2 * params.d;
  std::vector<Rat> up = {Rat::make(beta.den + beta.num, twod * beta.den)};
  std::vector<Rat> down = {Rat::make(beta.den - beta.num, twod * beta.den)};
  const Rat uni = Rat::make(1, twod);

  Rat total = Rat::make(0, 1);
  enumerate_paths<Rat>(params, up, down, uni, Rat::make(1, 1), n,
                       [&](const PathTerm& term, std::span<const Rat> probs) {
                         std::int64_t f = 1;
                         if (obs == RationalObservable::x_n) f = term.x_n;
                         if (obs == RationalObservable::n_n) f = term.novelty_count();
                         total = total + probs[0] * Rat::make(f, 1);
                       });
  return RationalValue{total.str(), total.to_double()};
}

}  // namespace erwlab
