#ifndef ARA_PROB_HPP
#define ARA_PROB_HPP

// Numeric building blocks shared by the whole library: stable log-domain
// accumulation, log binomial coefficients, the regularized upper incomplete
// gamma function (chi-square tail), and binomial confidence half-widths.
// Everything here is pure, allocation-free and safe to call concurrently.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace ara {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double pos_inf = std::numeric_limits<double>::infinity();

namespace detail {
inline constexpr long double ld_inf = std::numeric_limits<long double>::infinity();

// log(1 - exp(x)) for x <= 0, accurate through the whole range.
inline long double log1m_expl(long double x) {
  if (x >= 0.0L) return -ld_inf;  // only exact 0 reaches here in practice
  if (x > -0.6931471805599453094L) return logl(-expm1l(x));
  return log1pl(-expl(x));
}

// e * log(base) with the empty-product convention: base^0 == 1 even for
// base == 0, so a zero exponent always contributes log 1 = 0.
inline long double lpowl(long double base, long long e) {
  if (e == 0) return 0.0L;
  if (base <= 0.0L) return -ld_inf;
  return static_cast<long double>(e) * logl(base);
}

// log x with log 0 = -inf (no NaN for the x == 0 edge).
inline long double llogl(long double x) { return x > 0.0L ? logl(x) : -ld_inf; }

// log(exp(a) + exp(b)); -inf acts as the empty element.
inline long double lsel(long double a, long double b) {
  if (a == -ld_inf) return b;
  if (b == -ld_inf) return a;
  const long double hi = a > b ? a : b;
  const long double lo = a > b ? b : a;
  return hi + log1pl(expl(lo - hi));
}

// log(exp(a) - exp(b)) for a >= b; clamps to -inf when the difference
// vanishes (or when rounding makes b marginally exceed a).
inline long double ldiffl(long double a, long double b) {
  if (b == -ld_inf) return a;
  if (b >= a) return -ld_inf;
  return a + log1m_expl(b - a);
}

// x * log2(x) recovered from log(x); the x == 0 limit is 0.
inline long double xlog2_from_logl(long double lx) {
  if (lx == -ld_inf) return 0.0L;
  return expl(lx) * lx / 0.6931471805599453094L;
}
}  // namespace detail

// log(exp(a) + exp(b)) without overflow; -inf acts as the empty element.
inline double log_sum_exp(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// log(exp(a) - exp(b)) for a >= b; returns -inf on a tie.
inline double log_diff_exp(double a, double b) {
  return static_cast<double>(detail::ldiffl(a, b));
}

// x * log2(x) with the continuous extension x*log2(x) -> 0 as x -> 0.
inline double xlog2x(double x) {
  if (x < 0.0) throw std::domain_error("xlog2x: negative argument");
  if (x == 0.0) return 0.0;
  return x * std::log2(x);
}

// log of the binomial coefficient C(n, k); extended range via lgamma.
inline double log_binomial(long long n, long long k) {
  if (n < 0 || k < 0 || k > n) throw std::domain_error("log_binomial: bad arguments");
  if (k == 0 || k == n) return 0.0;
  return static_cast<double>(lgammal(static_cast<long double>(n) + 1.0L) -
                             lgammal(static_cast<long double>(k) + 1.0L) -
                             lgammal(static_cast<long double>(n - k) + 1.0L));
}

// log n!  (log Gamma(n+1)).
inline double log_factorial(long long n) {
  if (n < 0) throw std::domain_error("log_factorial: negative argument");
  return static_cast<double>(lgammal(static_cast<long double>(n) + 1.0L));
}

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
// Series expansion for x < a + 1, Lentz continued fraction otherwise;
// long double internals keep ~1e-15 relative accuracy up to a ~ 1e5.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  const long double la = a, lx = x;
  const long double log_prefix = la * logl(lx) - lx - lgammal(la);
  if (lx < la + 1.0L) {
    // P(a,x) as a power series; Q = 1 - P.
    long double ap = la, sum = 1.0L / la, del = sum;
    for (long long i = 0; i < 10000000; ++i) {
      ap += 1.0L;
      del *= lx / ap;
      sum += del;
      if (fabsl(del) < fabsl(sum) * 1e-19L) {
        const long double p = sum * expl(log_prefix);
        return static_cast<double>(1.0L - p);
      }
    }
    throw std::runtime_error("gamma_q: series did not converge");
  }
  // Continued fraction for Q(a,x) (modified Lentz).
  const long double tiny = 1e-4000L;
  long double b = lx + 1.0L - la, c = 1.0L / tiny, d = 1.0L / b, h = d;
  for (long long i = 1; i < 10000000; ++i) {
    const long double an = -static_cast<long double>(i) * (static_cast<long double>(i) - la);
    b += 2.0L;
    d = an * d + b;
    if (fabsl(d) < tiny) d = tiny;
    c = b + an / c;
    if (fabsl(c) < tiny) c = tiny;
    d = 1.0L / d;
    const long double delta = d * c;
    h *= delta;
    if (fabsl(delta - 1.0L) < 1e-19L) return static_cast<double>(expl(log_prefix) * h);
  }
  throw std::runtime_error("gamma_q: continued fraction did not converge");
}

// Half-width of the Wilson score interval for a binomial proportion.
// p_hat may be a mean of per-trial fractions in [0,1]; by the Bhatia-Davis
// inequality their variance is at most p_hat*(1-p_hat), so the Bernoulli
// half-width remains a usable (conservative-in-variance) uncertainty scale.
inline double wilson_halfwidth(double p_hat, double trials, double z = 1.959963984540054) {
  if (trials <= 0.0) return 1.0;
  if (p_hat < 0.0) p_hat = 0.0;
  if (p_hat > 1.0) p_hat = 1.0;
  const double z2n = z * z / trials;
  return z * std::sqrt(p_hat * (1.0 - p_hat) / trials + z2n / (4.0 * trials)) / (1.0 + z2n);
}

// SplitMix64: tiny deterministic PRNG used everywhere randomness is needed.
// Chosen for exact cross-platform reproducibility of streams from a seed.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, m); m is small in this library so the
  // floor(u * m) construction is exact enough and branch-free.
  std::uint64_t uniform_below(std::uint64_t m) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(m));
  }

  // Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derive an independent sub-seed from a master seed and an index, so that
// work item i produces the same stream regardless of scheduling.
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index) {
  Rng r(master ^ (0xA0761D6478BD642FULL * (index + 1)));
  r.next_u64();
  return r.next_u64();
}

}  // namespace ara

#endif  // ARA_PROB_HPP
