#ifndef ARA_BOUNDS_HPP
#define ARA_BOUNDS_HPP

// Random-coding achievability bounds for alarm random access on the Gaussian
// multiple-access channel. For a pattern with K active devices of which K_a
// transmit the common alarm message, the per-event error bounds are sums of
// exponentials e^{-n E} whose exponents E are maximized over one or two
// Gallager-style parameters. This header provides:
//   * the Gallager building blocks phi / phi_cap and the power-cap tail p0,
//   * reference implementations of each exponent and per-(K,K_a) bound
//     (full scans, fine searches),
//   * a cached aggregate engine (BoundCache / eps_bounds) that evaluates the
//     four population-averaged error bounds efficiently while only ever
//     replacing a maximized exponent by a lower estimate — which can only
//     loosen the bound, never invalidate it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ara/model.hpp"
#include "ara/prob.hpp"

namespace ara {

struct ChannelConfig {
  long long n = 1;       // blocklength
  double P_avg = 1.0;    // codebook per-symbol power P'
  double P_max = pos_inf;  // transmit power cap P; infinity disables the cap

  void validate() const {
    if (n < 1) throw std::domain_error("ChannelConfig: n must be >= 1");
    if (!(P_avg > 0.0)) throw std::domain_error("ChannelConfig: P_avg must be > 0");
    if (!(P_max > P_avg)) throw std::domain_error("ChannelConfig: need P_max > P_avg");
  }
};

struct ExponentSearchConfig {
  int rho_grid = 64;          // grid points per rho-type dimension
  double lambda_lo = 1e-9;    // lambda bracket (search is log-spaced inside)
  double lambda_hi = 1e3;
  int refine_iters = 48;      // golden-section refinement iterations
  long long qt_samples = 0;   // Monte-Carlo samples for q_t; 0 disables q_t

  void validate() const {
    if (rho_grid < 2) throw std::domain_error("ExponentSearchConfig: rho_grid must be >= 2");
    if (!(lambda_lo > 0.0) || !(lambda_hi > lambda_lo))
      throw std::domain_error("ExponentSearchConfig: need 0 < lambda_lo < lambda_hi");
    if (refine_iters < 0)
      throw std::domain_error("ExponentSearchConfig: refine_iters must be >= 0");
    if (qt_samples < 0)
      throw std::domain_error("ExponentSearchConfig: qt_samples must be >= 0");
  }

  // Cheap profile used for pre-passes over far-tail terms.
  ExponentSearchConfig coarse() const {
    ExponentSearchConfig c = *this;
    c.rho_grid = 9;
    c.refine_iters = 8;
    return c;
  }
};

// Per-(K, K_a) bound components.
struct PerKTerms {
  double a = 0.0;  // alarm-message confusion
  double b = 0.0;  // false positive
  double c = 0.0;  // per-device standard-message error
  double d = 1.0;  // joint success factor used by the eps_sa aggregate
  double e = 0.0;  // alarm-count misestimation
};

// The four population-averaged error bounds plus the per-cell table.
struct BoundSet {
  double eps_a_bound = 0.0;
  double eps_s_bound = 0.0;
  double eps_sa_bound = 0.0;
  double eps_fp_bound = 0.0;
  std::map<std::pair<long long, long long>, PerKTerms> per_k_terms;  // key (K, K_a)
};

// phi(k, alpha) = (1/2) ln(1 + 2 k P' alpha).
inline double phi(double k, double alpha, double P_avg) {
  const double arg = 1.0 + 2.0 * k * P_avg * alpha;
  if (!(arg > 0.0)) throw std::domain_error("phi: argument of ln is not positive");
  return 0.5 * std::log(arg);
}

// Phi(k, alpha) = alpha / (1 + 2 k P' alpha)  (derivative companion of phi).
inline double phi_cap(double k, double alpha, double P_avg) {
  const double den = 1.0 + 2.0 * k * P_avg * alpha;
  if (!(den > 0.0)) throw std::domain_error("phi_cap: denominator is not positive");
  return alpha / den;
}

// Probability that a Gaussian codeword violates the power cap:
// P[chi^2_n > n P_max / P_avg]; zero when the cap is infinite.
inline double p0(const ChannelConfig& cfg) {
  cfg.validate();
  if (cfg.P_max == pos_inf) return 0.0;
  return gamma_q(0.5 * static_cast<double>(cfg.n),
                 0.5 * static_cast<double>(cfg.n) * cfg.P_max / cfg.P_avg);
}

namespace detail {

inline constexpr double obj_invalid = -std::numeric_limits<double>::infinity();

// Non-throwing phi: out-of-domain arguments score -inf so searchers skip them.
inline double phi_raw(double k, double alpha, double Pp) {
  const double arg = 1.0 + 2.0 * k * Pp * alpha;
  return arg > 0.0 ? 0.5 * std::log(arg) : obj_invalid;
}

// Non-throwing Phi; caller must ensure the companion phi_raw was valid.
inline double phi_cap_raw(double k, double alpha, double Pp) {
  return alpha / (1.0 + 2.0 * k * Pp * alpha);
}

// ---- objective functions (value -inf marks a domain violation) ----

// Alarm-confusion exponent objective at fixed (rho, lambda).
struct EaParams {
  double K, Ka, Kap, Pp, inv_n;
  double log_penalty;  // ln(M_a - 1); only used with rho > 0
};
inline double ea_objective(const EaParams& p, double rho, double lambda) {
  const double kap2 = p.Kap * p.Kap, ka2 = p.Ka * p.Ka, kr = p.K - p.Ka;
  const double v1 = rho * phi_raw(kap2, lambda, p.Pp);  // lambda > 0: valid
  const double beta = phi_cap_raw(kap2, lambda, p.Pp);
  const double v2 = phi_raw(ka2, rho * beta, p.Pp);  // rho*beta >= 0: valid
  const double gamma = phi_cap_raw(ka2, rho * beta, p.Pp) - rho * lambda;
  const double v3 = phi_raw(kr, gamma, p.Pp);
  if (v3 == obj_invalid) return obj_invalid;
  const double psi = phi_cap_raw(kr, gamma, p.Pp);
  const double v4 = phi_raw(1.0 / p.Pp, psi, p.Pp);
  if (v4 == obj_invalid) return obj_invalid;
  return v1 + v2 + v3 + v4 - rho * p.inv_n * p.log_penalty;
}

// False-positive exponent objective (beta has the extra -lambda shift and the
// penalty uses ln(M_a); the sum giving b starts at K_a' = 1).
struct EfpParams {
  double K, Kap, Pp, inv_n;
  double log_penalty;  // ln(M_a)
};
inline double efp_objective(const EfpParams& p, double rho, double lambda) {
  const double kap2 = p.Kap * p.Kap;
  const double v1 = rho * phi_raw(kap2, lambda, p.Pp);
  const double beta = phi_cap_raw(kap2, lambda, p.Pp) - lambda;
  const double v2 = phi_raw(p.K, rho * beta, p.Pp);
  if (v2 == obj_invalid) return obj_invalid;
  const double gamma = phi_cap_raw(p.K, rho * beta, p.Pp);
  const double v3 = phi_raw(1.0 / p.Pp, gamma, p.Pp);
  if (v3 == obj_invalid) return obj_invalid;
  return v1 + v2 + v3 - rho * p.inv_n * p.log_penalty;
}

// Alarm-count misestimation exponent objective (1-D: lambda only).
struct EsaParams {
  double delta, Kr, Pp;  // delta = |K_a - K_a'|, Kr = K - K_a
};
inline double esa_objective(const EsaParams& p, double lambda) {
  const double d2 = p.delta * p.delta;
  const double v1 = phi_raw(d2, lambda, p.Pp);
  const double beta = phi_cap_raw(d2, lambda, p.Pp) - lambda;
  const double v2 = phi_raw(p.Kr, beta, p.Pp);
  if (v2 == obj_invalid) return obj_invalid;
  const double gamma = phi_cap_raw(p.Kr, beta, p.Pp);
  const double v3 = phi_raw(1.0 / p.Pp, gamma, p.Pp);
  if (v3 == obj_invalid) return obj_invalid;
  return v1 + v2 + v3;
}

// t-wise standard-decoding exponent objective at fixed (rho, rho1); the inner
// lambda maximization has the closed form lambda_s.
struct EtParams {
  double t, Pp, tR1, R2;  // tR1 = (t ln M_s - ln t!) / n, R2 = ln C(K,t) / n
};
inline double et_objective(const EtParams& p, double rho, double rho1) {
  const double Pt = p.Pp * p.t;
  const double D = (Pt - 1.0) * (Pt - 1.0) + 4.0 * Pt * (1.0 + rho * rho1) / (1.0 + rho);
  const double lam = (Pt - 1.0 + std::sqrt(D)) / (4.0 * (1.0 + rho1 * rho) * Pt);
  const double mu = rho * phi_cap_raw(p.t, lam, p.Pp);
  const double b = rho * lam - phi_cap_raw(p.t, mu, p.Pp);
  const double arg = 1.0 - 2.0 * b * rho1;
  if (!(arg > 0.0)) return obj_invalid;
  const double E0 = rho * rho1 * phi_raw(p.t, lam, p.Pp) + rho1 * phi_raw(p.t, mu, p.Pp) +
                    0.5 * std::log(arg);
  return -rho * rho1 * p.tR1 - rho1 * p.R2 + E0;
}

// ---- search machinery ----

template <class F>
double golden_max(F&& f, double lo, double hi, int iters, double* arg_out = nullptr) {
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  if (arg_out) *arg_out = f1 >= f2 ? x1 : x2;
  return f1 >= f2 ? f1 : f2;
}

struct LambdaBest {
  double value = obj_invalid;
  double lambda = 0.0;
};

// Maximize f(lambda) over the log-spaced bracket: coarse scan + golden
// refinement around the best coarse cell.
template <class F>
LambdaBest max_over_lambda(F&& f, const ExponentSearchConfig& s) {
  const int pts = std::max(8, s.rho_grid / 2);
  const double ulo = std::log(s.lambda_lo), uhi = std::log(s.lambda_hi);
  const double step = (uhi - ulo) / (pts - 1);
  LambdaBest best;
  int besti = -1;
  for (int i = 0; i < pts; ++i) {
    const double lam = std::exp(ulo + step * i);
    const double v = f(lam);
    if (v > best.value) {
      best.value = v;
      best.lambda = lam;
      besti = i;
    }
  }
  if (besti >= 0 && s.refine_iters > 0) {
    const double a = ulo + step * std::max(0, besti - 1);
    const double b = ulo + step * std::min(pts - 1, besti + 1);
    double uarg = 0.0;
    auto g = [&](double u) { return f(std::exp(u)); };
    const double v = golden_max(g, a, b, s.refine_iters, &uarg);
    if (v > best.value) {
      best.value = v;
      best.lambda = std::exp(uarg);
    }
  }
  return best;
}

struct SearchBest {
  double value = 0.0;  // every exponent has the analytic baseline 0
  double x = 0.0;      // rho (or lambda for 1-D searches)
  double y = 0.0;      // lambda (or rho1 for the t-wise exponent)
};

// Maximize f(rho, lambda) over rho in [0,1] (grid + golden) with a nested
// lambda line-search. The rho = 0 limit of every such objective is 0, which
// seeds the search and makes the result nonnegative by construction.
template <class F2>
SearchBest max_rho_lambda(F2&& f, const ExponentSearchConfig& s) {
  SearchBest best;
  best.x = 0.0;
  best.y = s.lambda_lo;
  const int G = s.rho_grid;
  int besti = -1;
  for (int i = 0; i < G; ++i) {
    const double rho = static_cast<double>(i) / (G - 1);
    auto f1 = [&](double lam) { return f(rho, lam); };
    const LambdaBest lb = max_over_lambda(f1, s);
    if (lb.value > best.value) {
      best.value = lb.value;
      best.x = rho;
      best.y = lb.lambda;
      besti = i;
    }
  }
  if (besti >= 0 && s.refine_iters > 0) {
    const double h = 1.5 / (G - 1);
    const double lo = std::max(0.0, best.x - h), hi = std::min(1.0, best.x + h);
    double rho_arg = best.x;
    auto g = [&](double rho) {
      auto f1 = [&](double lam) { return f(rho, lam); };
      return max_over_lambda(f1, s).value;
    };
    const double v = golden_max(g, lo, hi, std::min(s.refine_iters, 32), &rho_arg);
    if (v > best.value) {
      auto f1 = [&](double lam) { return f(rho_arg, lam); };
      const LambdaBest lb = max_over_lambda(f1, s);
      best.value = lb.value;
      best.x = rho_arg;
      best.y = lb.lambda;
    }
  }
  if (best.value < 0.0) best.value = 0.0;
  return best;
}

// Maximize f(rho, rho1) over the unit square (grid + alternating golden).
template <class F2>
SearchBest max_unit_square(F2&& f, const ExponentSearchConfig& s) {
  SearchBest best;
  const int G = s.rho_grid;
  for (int i = 0; i < G; ++i) {
    const double rho = static_cast<double>(i) / (G - 1);
    for (int j = 0; j < G; ++j) {
      const double rho1 = static_cast<double>(j) / (G - 1);
      const double v = f(rho, rho1);
      if (v > best.value) {
        best.value = v;
        best.x = rho;
        best.y = rho1;
      }
    }
  }
  if (s.refine_iters > 0) {
    const double h = 1.5 / (G - 1);
    for (int round = 0; round < 3; ++round) {
      double arg = best.x;
      auto fx = [&](double rho) { return f(rho, best.y); };
      double v = golden_max(fx, std::max(0.0, best.x - h), std::min(1.0, best.x + h),
                            s.refine_iters, &arg);
      if (v > best.value) {
        best.value = v;
        best.x = arg;
      }
      auto fy = [&](double rho1) { return f(best.x, rho1); };
      v = golden_max(fy, std::max(0.0, best.y - h), std::min(1.0, best.y + h),
                     s.refine_iters, &arg);
      if (v > best.value) {
        best.value = v;
        best.y = arg;
      }
    }
  }
  if (best.value < 0.0) best.value = 0.0;
  return best;
}

// Maximize a 1-D lambda objective; baseline 0 at lambda -> 0+.
template <class F>
SearchBest max_lambda_only(F&& f, const ExponentSearchConfig& s) {
  SearchBest best;
  best.x = s.lambda_lo;
  const LambdaBest lb = max_over_lambda(f, s);
  if (lb.value > best.value) {
    best.value = lb.value;
    best.x = lb.lambda;
  }
  return best;
}

}  // namespace detail

// Alarm-confusion exponent E_a for a competitor alarm multiplicity K_a'.
// Returns +infinity when M_a == 1 (no competing alarm message exists).
inline double exponent_Ea(long long K, long long K_a, long long K_a_prime, long long M_a,
                          long long n, const ChannelConfig& cfg,
                          const ExponentSearchConfig& search) {
  cfg.validate();
  search.validate();
  if (K < 0 || K_a < 0 || K_a > K || K_a_prime < 0 || K_a_prime > K)
    throw std::domain_error("exponent_Ea: need 0 <= K_a, K_a' <= K");
  if (M_a < 1) throw std::domain_error("exponent_Ea: M_a must be >= 1");
  if (M_a == 1) return pos_inf;
  detail::EaParams p{static_cast<double>(K), static_cast<double>(K_a),
                     static_cast<double>(K_a_prime), cfg.P_avg,
                     1.0 / static_cast<double>(n),
                     std::log(static_cast<double>(M_a - 1))};
  auto f = [&](double rho, double lam) { return detail::ea_objective(p, rho, lam); };
  return detail::max_rho_lambda(f, search).value;
}

// a(K, K_a) = min(sum over K_a' of e^{-n E_a}, 1); log-sum-exp accumulation.
inline double bound_a(long long K, long long K_a, long long M_a, long long n,
                      const ChannelConfig& cfg, const ExponentSearchConfig& search) {
  if (M_a == 1) return 0.0;
  double lse = neg_inf;
  for (long long kap = 0; kap <= K; ++kap) {
    const double E = exponent_Ea(K, K_a, kap, M_a, n, cfg, search);
    if (E == pos_inf) continue;
    lse = log_sum_exp(lse, -static_cast<double>(n) * E);
  }
  if (lse >= 0.0) return 1.0;
  return std::exp(lse);
}

// False-positive exponent E_fp for competitor multiplicity K_a' >= 1.
inline double exponent_Efp(long long K, long long K_a_prime, long long M_a, long long n,
                           const ChannelConfig& cfg, const ExponentSearchConfig& search) {
  cfg.validate();
  search.validate();
  if (K < 0 || K_a_prime < 1 || K_a_prime > K)
    throw std::domain_error("exponent_Efp: need 1 <= K_a' <= K");
  if (M_a < 1) throw std::domain_error("exponent_Efp: M_a must be >= 1");
  detail::EfpParams p{static_cast<double>(K), static_cast<double>(K_a_prime), cfg.P_avg,
                      1.0 / static_cast<double>(n), std::log(static_cast<double>(M_a))};
  auto f = [&](double rho, double lam) { return detail::efp_objective(p, rho, lam); };
  return detail::max_rho_lambda(f, search).value;
}

// b(K) = min(sum_{K_a'=1}^{K} e^{-n E_fp}, 1); empty sum (K = 0) gives 0.
inline double bound_b(long long K, long long M_a, long long n, const ChannelConfig& cfg,
                      const ExponentSearchConfig& search) {
  if (K < 0) throw std::domain_error("bound_b: K must be >= 0");
  if (K == 0) return 0.0;
  double lse = neg_inf;
  for (long long kap = 1; kap <= K; ++kap) {
    const double E = exponent_Efp(K, kap, M_a, n, cfg, search);
    lse = log_sum_exp(lse, -static_cast<double>(n) * E);
  }
  if (lse >= 0.0) return 1.0;
  return std::exp(lse);
}

// Alarm-count misestimation exponent E_sa; depends on the multiplicity
// mismatch only through delta = |K_a - K_a'| and on K - K_a.
inline double exponent_Esa(long long delta, long long K_minus_Ka, long long n,
                           const ChannelConfig& cfg, const ExponentSearchConfig& search) {
  cfg.validate();
  search.validate();
  (void)n;
  if (delta < 1) throw std::domain_error("exponent_Esa: need |K_a - K_a'| >= 1");
  if (K_minus_Ka < 0) throw std::domain_error("exponent_Esa: need K_a <= K");
  detail::EsaParams p{static_cast<double>(delta), static_cast<double>(K_minus_Ka), cfg.P_avg};
  auto f = [&](double lam) { return detail::esa_objective(p, lam); };
  return detail::max_lambda_only(f, search).value;
}

// e(K, K_a) = min(sum over K_a' != K_a of e^{-n E_sa}, 1), grouped by the
// multiplicity distance delta (each distance occurs once or twice).
inline double bound_e(long long K, long long K_a, long long n, const ChannelConfig& cfg,
                      const ExponentSearchConfig& search) {
  if (K < 0 || K_a < 0 || K_a > K) throw std::domain_error("bound_e: need 0 <= K_a <= K");
  if (K == 0) return 0.0;
  double lse = neg_inf;
  const long long dmax = std::max(K_a, K - K_a);
  for (long long delta = 1; delta <= dmax; ++delta) {
    const int mult = (K_a - delta >= 0 ? 1 : 0) + (K_a + delta <= K ? 1 : 0);
    if (mult == 0) continue;
    const double E = exponent_Esa(delta, K - K_a, n, cfg, search);
    lse = log_sum_exp(lse, std::log(static_cast<double>(mult)) - static_cast<double>(n) * E);
  }
  if (lse >= 0.0) return 1.0;
  return std::exp(lse);
}

// t-wise standard-decoding exponent E_t (rate terms R_1, R_2 included).
inline double exponent_Et(long long t, long long K, double M_s_log2, long long n,
                          const ChannelConfig& cfg, const ExponentSearchConfig& search) {
  cfg.validate();
  search.validate();
  if (t < 1 || t > K) throw std::domain_error("exponent_Et: need 1 <= t <= K");
  const double nd = static_cast<double>(n);
  const double ln2 = 0.6931471805599453094;
  detail::EtParams p{static_cast<double>(t), cfg.P_avg,
                     (static_cast<double>(t) * ln2 * M_s_log2 - log_factorial(t)) / nd,
                     log_binomial(K, t) / nd};
  auto f = [&](double rho, double rho1) { return detail::et_objective(p, rho, rho1); };
  return detail::max_unit_square(f, search).value;
}

namespace detail {

// Monte-Carlo estimate of the tail-threshold refinement q_t: draws the true
// standard codewords and noise, evaluates the t-wise information density over
// sampled t-subsets, and optimizes the split point over the empirical CDF.
// Deterministic by construction (fixed internal seed).
inline double qt_estimate(long long t, long long K, double M_s_log2, long long n,
                          const ChannelConfig& cfg, const ExponentSearchConfig& search) {
  if (search.qt_samples <= 0) return pos_inf;
  if (t < 1 || t > K) throw std::domain_error("qt_estimate: need 1 <= t <= K");
  const double nd = static_cast<double>(n);
  const double ln2 = 0.6931471805599453094;
  const double Pp = cfg.P_avg;
  const double tR1 = static_cast<double>(t) * ln2 * M_s_log2 - log_factorial(t);  // n*t*R1
  const double R2 = log_binomial(K, t);                                           // n*R2
  const double log_comp = tR1 + R2;  // n (t R_1 + R_2)
  const double Ct = 0.5 * std::log(1.0 + Pp * static_cast<double>(t));
  Rng rng(0x9E3779B97F4A7C15ULL ^ (static_cast<std::uint64_t>(t) << 32) ^
          static_cast<std::uint64_t>(K));
  const long long m = search.qt_samples;
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(m));
  const long long max_subsets = 64;
  std::vector<double> z(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> cw(static_cast<std::size_t>(K));
  for (long long s = 0; s < m; ++s) {
    for (auto& v : z) v = rng.normal();
    for (auto& c : cw) {
      c.resize(static_cast<std::size_t>(n));
      for (auto& v : c) v = rng.normal() * std::sqrt(Pp);
    }
    const double z2 = [&] {
      double acc = 0.0;
      for (double v : z) acc += v * v;
      return acc;
    }();
    // Enumerate t-subsets when few, otherwise sample random ones.
    double imin = pos_inf;
    auto eval_subset = [&](const std::vector<long long>& idx) {
      double a2 = 0.0;
      for (long long i = 0; i < n; ++i) {
        double ai = z[static_cast<std::size_t>(i)];
        for (long long jj : idx) ai += cw[static_cast<std::size_t>(jj)][static_cast<std::size_t>(i)];
        a2 += ai * ai;
      }
      const double it = nd * Ct + 0.5 * (a2 / (1.0 + Pp * static_cast<double>(t)) - z2);
      if (it < imin) imin = it;
    };
    const double log_total = log_binomial(K, t);
    if (log_total <= std::log(static_cast<double>(max_subsets))) {
      std::vector<long long> idx(static_cast<std::size_t>(t));
      for (long long i = 0; i < t; ++i) idx[static_cast<std::size_t>(i)] = i;
      while (true) {
        eval_subset(idx);
        long long i = t - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == K - t + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (long long j = i + 1; j < t; ++j)
          idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      }
    } else {
      std::vector<long long> pool(static_cast<std::size_t>(K));
      for (long long i = 0; i < K; ++i) pool[static_cast<std::size_t>(i)] = i;
      for (long long rep = 0; rep < max_subsets; ++rep) {
        // partial Fisher-Yates for a uniform t-subset
        for (long long i = 0; i < t; ++i) {
          const long long j =
              i + static_cast<long long>(rng.uniform_below(static_cast<std::uint64_t>(K - i)));
          std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        std::vector<long long> idx(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(t));
        eval_subset(idx);
      }
    }
    samples.push_back(imin);
  }
  std::sort(samples.begin(), samples.end());
  // q_t(gamma) = P[I_t <= gamma] + e^{n(tR1+R2) - gamma}; scan the CDF steps.
  double best = 1.0 + std::exp(std::min(700.0, log_comp - samples.front() + 1.0));
  const double md = static_cast<double>(m);
  for (long long i = 0; i < m; ++i) {
    const double gamma = samples[static_cast<std::size_t>(i)];
    const double tail = log_comp - gamma;
    const double q = static_cast<double>(i + 1) / md + (tail > 700.0 ? pos_inf : std::exp(tail));
    if (q < best) best = q;
    // also the left limit just below this step
    const double q_left = static_cast<double>(i) / md + (tail > 700.0 ? pos_inf : std::exp(tail));
    if (q_left < best) best = q_left;
  }
  return best;
}

}  // namespace detail

// c(K): per-device standard-message error bound: the t-wise union terms, the
// birthday collision term C(K,2)/M_s, and the power-cap term K p0.
inline double bound_c(long long K, double M_s_log2, long long n, const ChannelConfig& cfg,
                      const ExponentSearchConfig& search) {
  if (K < 0) throw std::domain_error("bound_c: K must be >= 0");
  if (K == 0) return 0.0;
  const double nd = static_cast<double>(n);
  const double ln2 = 0.6931471805599453094;
  double lse = neg_inf;
  for (long long t = 1; t <= K; ++t) {
    const double E = exponent_Et(t, K, M_s_log2, n, cfg, search);
    double log_term = -nd * E;
    if (search.qt_samples > 0) {
      const double qt = detail::qt_estimate(t, K, M_s_log2, n, cfg, search);
      if (qt < std::exp(std::min(0.0, log_term)))
        log_term = qt > 0.0 ? std::log(qt) : neg_inf;
    }
    lse = log_sum_exp(lse, std::log(static_cast<double>(t) / static_cast<double>(K)) + log_term);
  }
  if (K >= 2)  // birthday collision among the K standard messages
    lse = log_sum_exp(lse, log_binomial(K, 2) - ln2 * M_s_log2);
  const double p0v = p0(cfg);
  if (p0v > 0.0)
    lse = log_sum_exp(lse, std::log(static_cast<double>(K)) + std::log(p0v));
  if (lse >= 0.0) return 1.0;
  return std::exp(lse);
}

// d(K, K_a) = (1 - min(a + p0, 1)) (1 - min(e + p0, 1)): probability factor
// that both the alarm message and the alarm multiplicity were resolved.
inline double bound_d_from(double a, double e, double p0v) {
  const double fa = 1.0 - std::min(a + p0v, 1.0);
  const double fe = 1.0 - std::min(e + p0v, 1.0);
  return fa * fe;
}

inline double bound_d(long long K, long long K_a, long long M_a, long long n,
                      const ChannelConfig& cfg, const ExponentSearchConfig& search) {
  const double a = bound_a(K, K_a, M_a, n, cfg, search);
  const double e = bound_e(K, K_a, n, cfg, search);
  return bound_d_from(a, e, p0(cfg));
}

namespace detail {

// Cached aggregate engine. All exponent terms depend on the traffic model
// only through integer counts (plus M_a, log2 M_s, n, P'), so values cached
// here stay valid while the probabilities (p_a, p_s, p_d) vary — which is
// exactly what the power optimizer's inner bisections need.
//
// Tail policy for the K_a'/delta/t sums: terms near the dominant index get
// the full fine search; once several consecutive terms fall 16 orders of
// magnitude below the running sum, the walk switches to evaluating the
// objective at the last fine maximizer (a lower estimate of the true
// exponent, hence an overestimate of the term — the sum stays a valid upper
// bound). If such a frozen-point term ever becomes significant again, the
// walk switches back to searching.
class BoundCache {
 public:
  BoundCache(long long M_a, double M_s_log2, const ChannelConfig& cfg,
             const ExponentSearchConfig& search)
      : Ma_(M_a), log2Ms_(M_s_log2), cfg_(cfg), fine_(search), p0_(p0(cfg)),
        nd_(static_cast<double>(cfg.n)) {}

  double p0_value() const { return p0_; }

  // a(K, K_a) keyed by (K_a, K_s = K - K_a).
  double a_value(long long Ka, long long Ks) {
    const auto key = std::make_pair(Ka, Ks);
    auto it = a_map_.find(key);
    if (it != a_map_.end()) return it->second;
    const double v = compute_a(Ka, Ks);
    a_map_.emplace(key, v);
    return v;
  }

  // e(K, K_a): assembled from per-(delta, K_s) exponent terms. Distances
  // near the dominant one get the full search; farther ones reuse the last
  // fine maximizer (an overestimate of each term), so nothing is dropped.
  double e_value(long long Ka, long long Ks) {
    const auto key = std::make_pair(Ka, Ks);
    auto it = e_map_.find(key);
    if (it != e_map_.end()) return it->second;
    const long long K = Ka + Ks;
    double out = 0.0;
    if (K > 0) {
      double lse = neg_inf;
      const long long dmax = std::max(Ka, K - Ka);
      EsaParams p{0.0, static_cast<double>(Ks), cfg_.P_avg};
      double flam = fine_.lambda_lo;
      bool frozen = false;
      int consec_small = 0;
      for (long long delta = 1; delta <= dmax; ++delta) {
        const int mult = (Ka - delta >= 0 ? 1 : 0) + (Ka + delta <= K ? 1 : 0);
        if (mult == 0) continue;
        const double lmult = std::log(static_cast<double>(mult));
        double E = 0.0;
        if (frozen) {
          p.delta = static_cast<double>(delta);
          const double v = esa_objective(p, flam);
          E = std::max(0.0, v == obj_invalid ? 0.0 : v);
          if (lmult - nd_ * E > lse - 37.0) frozen = false;  // significant: search
        }
        if (!frozen) {
          const SearchBest sb = esa_exponent(delta, Ks);
          E = sb.value;
          flam = sb.x;
        }
        const double lt = lmult - nd_ * E;
        lse = log_sum_exp(lse, lt);
        if (!frozen) {
          if (lt < lse - 37.0) {
            if (++consec_small >= 4) frozen = true;
          } else {
            consec_small = 0;
          }
        }
      }
      out = lse >= 0.0 ? 1.0 : std::exp(lse);
    }
    e_map_.emplace(key, out);
    return out;
  }

  double b_value(long long K) {
    auto it = b_map_.find(K);
    if (it != b_map_.end()) return it->second;
    const double v = compute_b(K);
    b_map_.emplace(K, v);
    return v;
  }

  double c_value(long long K) {
    auto it = c_map_.find(K);
    if (it != c_map_.end()) return it->second;
    const double v = compute_c(K);
    c_map_.emplace(K, v);
    return v;
  }

  double d_value(long long Ka, long long Ks) {
    return bound_d_from(a_value(Ka, Ks), e_value(Ka, Ks), p0_);
  }

 private:
  SearchBest esa_exponent(long long delta, long long Ks) {
    const auto key = std::make_pair(delta, Ks);
    auto it = esa_map_.find(key);
    if (it != esa_map_.end()) return it->second;
    EsaParams p{static_cast<double>(delta), static_cast<double>(Ks), cfg_.P_avg};
    auto f = [&](double lam) { return esa_objective(p, lam); };
    const SearchBest sb = max_lambda_only(f, fine_);
    esa_map_.emplace(key, sb);
    return sb;
  }

  double compute_a(long long Ka, long long Ks) {
    if (Ma_ == 1) return 0.0;
    const long long K = Ka + Ks;
    EaParams p{static_cast<double>(K), static_cast<double>(Ka), 0.0, cfg_.P_avg,
               1.0 / nd_, std::log(static_cast<double>(Ma_ - 1))};
    double lse = neg_inf;
    // Walk K_a' outward from the true multiplicity: down to 0, then up to K.
    walk_terms(
        Ka, 0, -1, K, [&](double lt) { lse = log_sum_exp(lse, lt); },
        [&](long long kap, double rho, double lam) {
          p.Kap = static_cast<double>(kap);
          return ea_objective(p, rho, lam);
        });
    if (Ka + 1 <= K)
      walk_terms(
          Ka + 1, K, +1, K, [&](double lt) { lse = log_sum_exp(lse, lt); },
          [&](long long kap, double rho, double lam) {
            p.Kap = static_cast<double>(kap);
            return ea_objective(p, rho, lam);
          });
    if (lse >= 0.0) return 1.0;
    return std::exp(lse);
  }

  double compute_b(long long K) {
    if (K == 0) return 0.0;
    EfpParams p{static_cast<double>(K), 0.0, cfg_.P_avg, 1.0 / nd_,
                std::log(static_cast<double>(Ma_))};
    double lse = neg_inf;
    walk_terms(
        1, K, +1, K, [&](double lt) { lse = log_sum_exp(lse, lt); },
        [&](long long kap, double rho, double lam) {
          p.Kap = static_cast<double>(kap);
          return efp_objective(p, rho, lam);
        });
    if (lse >= 0.0) return 1.0;
    return std::exp(lse);
  }

  double compute_c(long long K) {
    if (K == 0) return 0.0;
    const double ln2 = 0.6931471805599453094;
    double lse = neg_inf;
    // Fine search while terms matter; frozen-(rho, rho1) evaluation (with the
    // closed-form lambda) afterwards. E_t lacks a single monotone direction,
    // so significant frozen terms re-trigger the search.
    double frho = 0.5, frho1 = 0.5;
    bool frozen = false;
    int consec_small = 0;
    for (long long t = 1; t <= K; ++t) {
      EtParams p{static_cast<double>(t), cfg_.P_avg,
                 (static_cast<double>(t) * ln2 * log2Ms_ - log_factorial(t)) / nd_,
                 log_binomial(K, t) / nd_};
      auto f = [&](double r, double r1) { return et_objective(p, r, r1); };
      double E;
      if (frozen) {
        const double v = f(frho, frho1);
        E = std::max(0.0, v == obj_invalid ? 0.0 : v);
        const double lt_probe =
            std::log(static_cast<double>(t) / static_cast<double>(K)) - nd_ * E;
        if (lt_probe > lse - 37.0) {  // significant again: search properly
          frozen = false;
          consec_small = 0;
        }
      }
      if (!frozen) {
        const SearchBest sb = max_unit_square(f, fine_);
        E = sb.value;
        frho = sb.x;
        frho1 = sb.y;
      }
      double log_term = std::log(static_cast<double>(t) / static_cast<double>(K)) - nd_ * E;
      if (fine_.qt_samples > 0) {
        const double qt = qt_estimate(t, K, log2Ms_, cfg_.n, cfg_, fine_);
        const double log_qt = qt > 0.0 ? std::log(qt) : neg_inf;
        if (log_qt < -nd_ * E)
          log_term = std::log(static_cast<double>(t) / static_cast<double>(K)) + log_qt;
      }
      lse = log_sum_exp(lse, log_term);
      if (!frozen) {
        if (log_term < lse - 37.0) {
          if (++consec_small >= 4 && t >= 8) frozen = true;
        } else {
          consec_small = 0;
        }
      }
    }
    if (K >= 2) lse = log_sum_exp(lse, log_binomial(K, 2) - ln2 * log2Ms_);
    if (p0_ > 0.0) lse = log_sum_exp(lse, std::log(static_cast<double>(K)) + std::log(p0_));
    if (lse >= 0.0) return 1.0;
    return std::exp(lse);
  }

  // Walk indices from `from` to `to` (step `dir`), fine-searching while terms
  // are significant and falling back to frozen-maximizer evaluation after
  // `consec`utive negligible terms. `add` accumulates log-terms; `objective`
  // evaluates the exponent objective for (index, rho, lambda).
  template <class Add, class Obj>
  void walk_terms(long long from, long long to, int dir, long long K, Add&& add,
                  Obj&& objective) {
    (void)K;
    double lse_local = neg_inf;  // tracks significance within this walk
    double frho = 0.0, flam = fine_.lambda_lo;
    bool have_frozen = false, frozen = false;
    int consec_small = 0;
    for (long long idx = from; dir > 0 ? idx <= to : idx >= to; idx += dir) {
      double E;
      if (frozen && have_frozen) {
        const double v = objective(idx, frho, flam);
        E = std::max(0.0, v == obj_invalid ? 0.0 : v);
        if (-nd_ * E > lse_local - 37.0) {  // became significant: re-search
          frozen = false;
        }
      }
      if (!frozen) {
        auto f = [&](double rho, double lam) { return objective(idx, rho, lam); };
        const SearchBest sb = max_rho_lambda(f, fine_);
        E = sb.value;
        frho = sb.x;
        flam = sb.y;
        have_frozen = true;
      }
      const double lt = -nd_ * E;
      add(lt);
      lse_local = log_sum_exp(lse_local, lt);
      if (!frozen) {
        if (lt < lse_local - 37.0) {
          if (++consec_small >= 4) frozen = true;
        } else {
          consec_small = 0;
        }
      }
    }
  }

  long long Ma_;
  double log2Ms_;
  ChannelConfig cfg_;
  ExponentSearchConfig fine_;
  double p0_, nd_;
  std::map<std::pair<long long, long long>, double> a_map_;        // (K_a, K_s) -> a
  std::map<std::pair<long long, long long>, double> e_map_;        // (K_a, K_s) -> e
  std::map<std::pair<long long, long long>, SearchBest> esa_map_;  // (delta, K_s)
  std::map<long long, double> b_map_, c_map_;
};

}  // namespace detail

// Target error probabilities the operating point must satisfy. Also accepted
// by eps_bounds, where known targets allow sums that have already crossed
// their target to stop early (conclusively infeasible either way).
struct ReliabilityTargets {
  double eps_a = 0.1;
  double eps_s = 0.1;
  double eps_sa = 0.1;
  double eps_fp = 0.1;

  void validate() const {
    auto ok = [](double p) { return p > 0.0 && p < 1.0; };
    if (!ok(eps_a) || !ok(eps_s) || !ok(eps_sa) || !ok(eps_fp))
      throw std::domain_error("ReliabilityTargets: each target must lie in (0,1)");
  }
};

namespace detail {

// Average of a [0,1]-valued function under a binomial pmf, padded with the
// probability mass the truncated walk did not cover (each uncovered term is
// at most 1), so the result upper-bounds the exact average. Stops early once
// the padded sum crosses abort_above.
template <class Fn>
double avg01_padded(long long N, double p, Fn&& f, double abort_above = pos_inf) {
  auto lp = [&](long long k) {
    return static_cast<double>(log_binom_pmf_l(N, k, static_cast<long double>(p)));
  };
  const long long start = static_cast<long long>(static_cast<double>(N) * p);
  double mass = 0.0;
  const double v =
      expect_truncated(N, start, lp, f, 1e-12, &mass, abort_above);
  return v + std::max(0.0, 1.0 - mass);
}

}  // namespace detail

// Population-averaged error bounds. The alarm-world average over (K, K_a) is
// evaluated in the equivalent independent parametrization K_a ~ Bin(N, p_d),
// K_s | K_a ~ Bin(N - K_a, p_s) (the joint pmf factorizes exactly), which
// lets the cache key cells by the integer pair (K_a, K_s). Truncated tails
// are padded with their worst-case mass, so every returned value is a valid
// upper bound; when targets are given, a sum that crosses its target aborts
// early (still padded, still an upper bound).
inline BoundSet eps_bounds(const CorrelationModel& m, const ChannelConfig& cfg,
                           const ExponentSearchConfig& search,
                           const ReliabilityTargets* targets = nullptr) {
  m.validate();
  cfg.validate();
  search.validate();
  detail::BoundCache cache(m.M_a, m.log2_Ms, cfg, search);
  BoundSet out;
  const double p0v = cache.p0_value();
  const double no_abort = pos_inf;

  // Quiet world: K ~ Binomial(N, p_s).
  out.eps_fp_bound = detail::avg01_padded(
      m.N, m.p_s, [&](long long K) { return cache.b_value(K); },
      targets ? targets->eps_fp : no_abort);
  out.eps_s_bound = detail::avg01_padded(
      m.N, m.p_s,
      [&](long long K) {
        const double b = cache.b_value(K), c = cache.c_value(K);
        return b + c - b * c;
      },
      targets ? targets->eps_s : no_abort);

  // Alarm world: K_a ~ Binomial(N, p_d), K_s | K_a ~ Binomial(N - K_a, p_s).
  auto inner01 = [&](long long Ka, auto&& cell) {
    return std::min(1.0, detail::avg01_padded(m.N - Ka, m.p_s, cell));
  };
  out.eps_a_bound = p0v + detail::avg01_padded(
                              m.N, m.p_d,
                              [&](long long Ka) {
                                return inner01(Ka, [&](long long Ks) {
                                  return cache.a_value(Ka, Ks);
                                });
                              },
                              targets ? targets->eps_a - p0v : no_abort);
  out.eps_sa_bound = detail::avg01_padded(
      m.N, m.p_d,
      [&](long long Ka) {
        return inner01(Ka, [&](long long Ks) {
          const double d = cache.d_value(Ka, Ks);
          const double c = cache.c_value(Ks);
          const long long K = Ka + Ks;
          PerKTerms t;  // record every cell this pass visits
          t.a = cache.a_value(Ka, Ks);
          t.e = cache.e_value(Ka, Ks);
          t.d = d;
          t.b = cache.b_value(K);
          t.c = cache.c_value(K);
          out.per_k_terms[{K, Ka}] = t;
          return 1.0 - d * (1.0 - c);
        });
      },
      targets ? targets->eps_sa : no_abort);

  auto clamp01 = [](double& v) { v = std::min(1.0, std::max(0.0, v)); };
  clamp01(out.eps_a_bound);
  clamp01(out.eps_s_bound);
  clamp01(out.eps_sa_bound);
  clamp01(out.eps_fp_bound);
  return out;
}

}  // namespace ara

#endif  // ARA_BOUNDS_HPP
