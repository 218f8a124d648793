#ifndef ARA_MODEL_HPP
#define ARA_MODEL_HPP

// Traffic model for alarm random access: N devices share one codebook with
// M_a alarm messages and M_s standard messages. An alarm occurs with
// probability p_a; each device then detects it independently with
// probability p_d and transmits the (common, uniformly drawn) alarm message.
// A device that has not detected an alarm transmits a uniform standard
// message with probability p_s and stays silent otherwise.
//
// This header provides the activity-count distributions and the per-device
// conditional entropy chain that yields the achievable spectral efficiency.
// All probability work is done in the log domain with long double internals
// so that normalization holds to ~1e-15 even at N in the tens of thousands.

#include <functional>
#include <stdexcept>
#include <string>

#include "ara/prob.hpp"

namespace ara {

struct CorrelationModel {
  double p_a = 0.0;       // alarm probability
  double p_s = 0.0;       // standard-transmission probability
  double p_d = 0.0;       // per-device alarm detection probability
  long long N = 1;        // device population
  long long M_a = 1;      // number of alarm messages
  long long M_s = 0;      // standard-message count; 0 when not representable
  double log2_Ms = 0.0;   // log2 of the standard-message count (authoritative)

  // Build a model whose standard-message count is an explicit integer.
  static CorrelationModel with_count(double p_a, double p_s, double p_d, long long N,
                                     long long M_a, long long M_s) {
    CorrelationModel m;
    m.p_a = p_a;
    m.p_s = p_s;
    m.p_d = p_d;
    m.N = N;
    m.M_a = M_a;
    m.M_s = M_s;
    m.log2_Ms = std::log2(static_cast<double>(M_s));
    m.validate();
    return m;
  }

  // Build a model given only log2 of the standard-message count (large sets).
  static CorrelationModel with_log2_count(double p_a, double p_s, double p_d, long long N,
                                          long long M_a, double log2_Ms) {
    CorrelationModel m;
    m.p_a = p_a;
    m.p_s = p_s;
    m.p_d = p_d;
    m.N = N;
    m.M_a = M_a;
    m.log2_Ms = log2_Ms;
    if (log2_Ms < 53.0) {
      const double count = std::exp2(log2_Ms);
      if (count == std::floor(count)) m.M_s = static_cast<long long>(count);
    }
    m.validate();
    return m;
  }

  void validate() const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in01(p_a) || !in01(p_s) || !in01(p_d))
      throw std::domain_error("CorrelationModel: probabilities must lie in [0,1]");
    if (N < 1) throw std::domain_error("CorrelationModel: N must be >= 1");
    if (M_a < 1) throw std::domain_error("CorrelationModel: M_a must be >= 1");
    if (!(log2_Ms >= 0.0) || !std::isfinite(log2_Ms))
      throw std::domain_error("CorrelationModel: log2_Ms must be finite and >= 0");
    if (M_s < 0) throw std::domain_error("CorrelationModel: M_s must be >= 0");
    if (M_s > 0 && std::fabs(std::log2(static_cast<double>(M_s)) - log2_Ms) > 1e-9)
      throw std::domain_error("CorrelationModel: M_s and log2_Ms disagree");
  }
};

// One realization of the activity counts: K active devices of which K_a
// transmit the alarm message.
struct ActivitySnapshot {
  long long K = 0;
  long long K_a = 0;

  void validate(long long N) const {
    if (K < 0 || K > N || K_a < 0 || K_a > K)
      throw std::domain_error("ActivitySnapshot: need 0 <= K_a <= K <= N");
  }
};

namespace detail {

// Shared log-domain quantities of the traffic model.
struct ModelLogs {
  long double q;      // P[device transmits | alarm] = p_d + (1-p_d) p_s
  long double r;      // P[device sends standard | alarm] = (1-p_d) p_s
  long double pdbar;  // 1 - p_d
  long double l_pa, l_1pa, l_q, l_r, l_ps, l_pd, l_pdbar;

  explicit ModelLogs(const CorrelationModel& m) {
    const long double pd = m.p_d, ps = m.p_s, pa = m.p_a;
    pdbar = 1.0L - pd;
    r = pdbar * ps;
    q = pd + r;
    l_pa = llogl(pa);
    l_1pa = llogl(1.0L - pa);
    l_q = llogl(q);
    l_r = llogl(r);
    l_ps = llogl(ps);
    l_pd = llogl(pd);
    l_pdbar = llogl(pdbar);
  }
};

inline long double log_binomial_l(long long n, long long k) {
  if (k < 0 || k > n) return -ld_inf;
  if (k == 0 || k == n) return 0.0L;
  return lgammal(static_cast<long double>(n) + 1.0L) -
         lgammal(static_cast<long double>(k) + 1.0L) -
         lgammal(static_cast<long double>(n - k) + 1.0L);
}

// log Binomial(n, p) pmf at k, with the 0^0 = 1 convention.
inline long double log_binom_pmf_l(long long n, long long k, long double p) {
  if (k < 0 || k > n) return -ld_inf;
  return log_binomial_l(n, k) + lpowl(p, k) + lpowl(1.0L - p, n - k);
}

}  // namespace detail

// P[K devices are active | an alarm occurred]: Binomial(N, p_d + (1-p_d) p_s).
inline double p_k_given_alarm(const CorrelationModel& m, long long k) {
  m.validate();
  if (k < 0 || k > m.N) throw std::domain_error("p_k_given_alarm: k out of range");
  const detail::ModelLogs L(m);
  return static_cast<double>(expl(detail::log_binom_pmf_l(m.N, k, L.q)));
}

// P[K devices are active | no alarm]: Binomial(N, p_s).
inline double p_k_given_no_alarm(const CorrelationModel& m, long long k) {
  m.validate();
  if (k < 0 || k > m.N) throw std::domain_error("p_k_given_no_alarm: k out of range");
  return static_cast<double>(
      expl(detail::log_binom_pmf_l(m.N, k, static_cast<long double>(m.p_s))));
}

// P[K_a of the K active devices sent the alarm message | alarm occurred]:
// Binomial(K, p_d / q). For K == 0 the count is deterministically 0. When
// p_d = p_s = 0 and K > 0 the conditioning event has probability zero.
inline double p_ka_given_k(const CorrelationModel& m, long long K, long long k_a) {
  m.validate();
  if (K < 0 || K > m.N || k_a < 0 || k_a > K)
    throw std::domain_error("p_ka_given_k: need 0 <= K_a <= K <= N");
  if (K == 0) return 1.0;  // empty product: K_a = 0 with certainty
  const detail::ModelLogs L(m);
  if (L.q <= 0.0L)
    throw std::domain_error("p_ka_given_k: p_d = p_s = 0 makes K > 0 impossible");
  return static_cast<double>(
      expl(detail::log_binom_pmf_l(K, k_a, static_cast<long double>(m.p_d) / L.q)));
}

// Conditional entropy (bits) of the k-th active device's message given the
// messages of the first k-1 active devices, for a pattern with K active
// devices out of N. The receiver does not know whether an alarm occurred;
// the history resolves it gradually, which is what the two terms below
// capture: histories that already contain an alarm message, and all-standard
// histories whose next message may still be the alarm.
inline double conditional_entropy_term(const CorrelationModel& m, long long K, long long k) {
  m.validate();
  if (K < 0 || K > m.N) throw std::domain_error("conditional_entropy_term: K out of range");
  if (k < 1 || k > K) throw std::domain_error("conditional_entropy_term: need 1 <= k <= K");
  using namespace detail;
  const ModelLogs L(m);
  const long long N = m.N;
  const long double log2Ms = m.log2_Ms;

  // Probability of the activity pattern itself (common (1-p_s)^{N-K} factors
  // cancelled): alarm world p_a q^K (1-p_d)^{N-K}, quiet world (1-p_a) p_s^K.
  const long double logZ =
      lsel(L.l_pa + lpowl(L.q, K) + lpowl(L.pdbar, N - K),
           L.l_1pa + lpowl(static_cast<long double>(m.p_s), K));
  if (logZ == -ld_inf) {
    // p_d = 1 with K < N: a partial activity pattern is impossible exactly
    // (every device detects and transmits), but it is the p_d -> 1 limit of
    // conditioning on K receptions during an alarm, and that limit is what a
    // detection-probability sweep reaches at its endpoint: all K active
    // devices repeat the one alarm message, so only the first reception
    // carries information -- which of the M_a alarm messages it is. We take
    // the limit in p_d (the swept variable) rather than in p_s, which gives
    // the all-alarm reading even in the doubly-degenerate p_s = 0 corner.
    if (m.p_d >= 1.0 && m.p_a > 0.0)
      return k == 1 ? std::log2(static_cast<double>(m.M_a)) : 0.0;
    throw std::domain_error("conditional_entropy_term: activity pattern has probability zero");
  }

  // Term 1: histories among the first k-1 devices that already revealed the
  // alarm message. Their total weight is p_a N0 (q^{k-1} - r^{k-1}) where
  // N0 = q^{K-k+1} (1-p_d)^{N-K} / Z, and each contributes the per-device
  // mixture entropy B0 + B1 of "alarm repeat vs fresh standard message".
  long double t1 = 0.0L;
  const long double log_qr_diff =
      (k == 1) ? -ld_inf : ldiffl(lpowl(L.q, k - 1), lpowl(L.r, k - 1));
  if (log_qr_diff != -ld_inf) {
    const long double logN0 = lpowl(L.q, K - k + 1) + lpowl(L.pdbar, N - K) - logZ;
    const long double logW1 = L.l_pa + logN0 + log_qr_diff;
    if (logW1 != -ld_inf) {
      const long double f = static_cast<long double>(m.p_d) / L.q;  // q > 0 here
      const long double rq = L.r / L.q;
      const long double B0 = f > 0.0L ? -f * log2l(f) : 0.0L;
      const long double B1 = rq > 0.0L ? rq * (log2Ms - log2l(rq)) : 0.0L;
      t1 = expl(logW1) * (B0 + B1);
    }
  }

  // Term 2: the all-standard history. B2 is its weight; B3 the posterior
  // probability that device k transmits the alarm message given it.
  long double t2 = 0.0L;
  const long double logDen3 =
      lsel(L.l_pa + lpowl(L.q, K - k + 1) + lpowl(L.pdbar, N - K + k - 1) +
               lpowl(static_cast<long double>(m.p_s), k - 1),
           L.l_1pa + lpowl(static_cast<long double>(m.p_s), K));
  const long double logB2 = logDen3 - logZ;
  if (logDen3 != -ld_inf && logB2 != -ld_inf) {
    const long double logNum3 = L.l_pa + L.l_pd + lpowl(L.q, K - k) +
                                lpowl(L.pdbar, N - K + k - 1) +
                                lpowl(static_cast<long double>(m.p_s), k - 1);
    const long double logNum1m =
        lsel(L.l_pa + lpowl(L.q, K - k) + lpowl(L.pdbar, N - K + k - 1) +
                 lpowl(static_cast<long double>(m.p_s), k - 1) + L.l_r,
             L.l_1pa + lpowl(static_cast<long double>(m.p_s), K));
    long double logB3 = logNum3 - logDen3;
    long double log1mB3 = logNum1m - logDen3;
    if (logB3 > 0.0L) logB3 = 0.0L;      // clamp rounding noise
    if (log1mB3 > 0.0L) log1mB3 = 0.0L;
    const long double h = -(xlog2_from_logl(logB3) + xlog2_from_logl(log1mB3));
    const long double bits = h + expl(logB3) * log2l(static_cast<long double>(m.M_a)) +
                             expl(log1mB3) * log2Ms;
    t2 = expl(logB2) * bits;
  }

  double out = static_cast<double>(t1 + t2);
  return out < 0.0 ? 0.0 : out;  // guard vanishing negative rounding noise
}

// Achievable spectral efficiency (bits per channel use) for K active
// devices and blocklength n: the chain sum of conditional entropies over n.
inline double spectral_efficiency(const CorrelationModel& m, long long K, long long n) {
  if (n < 1) throw std::domain_error("spectral_efficiency: n must be >= 1");
  if (K < 0 || K > m.N) throw std::domain_error("spectral_efficiency: K out of range");
  if (K == 0) return 0.0;
  long double h = 0.0L;
  for (long long k = 1; k <= K; ++k)
    h += static_cast<long double>(conditional_entropy_term(m, K, k));
  return static_cast<double>(h / static_cast<long double>(n));
}

namespace detail {

// Expectation of f(K) under a log-pmf on {0..N}, expanding outward from a
// starting index (put it near the mode) until the accumulated probability
// mass exceeds 1 - tail_tol. Evaluates f only where the pmf matters.
// Optionally reports the probability mass actually covered (callers that
// need a guaranteed upper bound on an f <= 1 average add the leftover mass)
// and stops early once the accumulated sum reaches abort_above (partial sums
// of nonnegative terms only ever grow, so crossing a fixed threshold is
// already conclusive for the caller's comparison).
template <class LogPmf, class Fn>
double expect_truncated(long long N, long long start, LogPmf&& log_pmf, Fn&& f,
                        double tail_tol = 1e-12, double* mass_out = nullptr,
                        double abort_above = pos_inf) {
  if (start < 0) start = 0;
  if (start > N) start = N;
  long double acc = 0.0L, mass = 0.0L;
  long long lo = start, hi = start;
  const long double p_start = expl(static_cast<long double>(log_pmf(start)));
  acc += p_start * static_cast<long double>(f(start));
  mass += p_start;
  // Two-pointer outward expansion, larger next pmf value first.
  long double next_lo = lo > 0 ? expl(static_cast<long double>(log_pmf(lo - 1))) : -1.0L;
  long double next_hi = hi < N ? expl(static_cast<long double>(log_pmf(hi + 1))) : -1.0L;
  while ((lo > 0 || hi < N) && mass < 1.0L - static_cast<long double>(tail_tol) &&
         acc < static_cast<long double>(abort_above)) {
    if (next_hi >= next_lo) {
      ++hi;
      acc += next_hi * static_cast<long double>(f(hi));
      mass += next_hi;
      next_hi = hi < N ? expl(static_cast<long double>(log_pmf(hi + 1))) : -1.0L;
    } else {
      --lo;
      acc += next_lo * static_cast<long double>(f(lo));
      mass += next_lo;
      next_lo = lo > 0 ? expl(static_cast<long double>(log_pmf(lo - 1))) : -1.0L;
    }
  }
  if (mass_out) *mass_out = static_cast<double>(mass);
  return static_cast<double>(acc);
}

}  // namespace detail

// E[H(W_1..W_K)/K] in bits per active device, averaging over the activity
// count K drawn from the mixture p_a * P(.|alarm) + (1-p_a) * P(.|no alarm).
// K = 0 contributes zero. The parameter n is accepted for signature symmetry
// with spectral_efficiency; the quantity itself is blocklength-free.
inline double mean_entropy_per_active_device(const CorrelationModel& m, long long n) {
  (void)n;
  m.validate();
  const detail::ModelLogs L(m);
  auto h_over_k = [&](long long K) -> double {
    if (K == 0) return 0.0;
    long double h = 0.0L;
    for (long long k = 1; k <= K; ++k)
      h += static_cast<long double>(conditional_entropy_term(m, K, k));
    return static_cast<double>(h / static_cast<long double>(K));
  };
  double out = 0.0;
  if (m.p_a > 0.0) {
    auto lp = [&](long long k) {
      return static_cast<double>(detail::log_binom_pmf_l(m.N, k, L.q));
    };
    const long long start = static_cast<long long>(static_cast<double>(m.N) *
                                                   static_cast<double>(L.q));
    out += m.p_a * detail::expect_truncated(m.N, start, lp, h_over_k);
  }
  if (m.p_a < 1.0) {
    auto lp = [&](long long k) {
      return static_cast<double>(
          detail::log_binom_pmf_l(m.N, k, static_cast<long double>(m.p_s)));
    };
    const long long start = static_cast<long long>(static_cast<double>(m.N) * m.p_s);
    out += (1.0 - m.p_a) * detail::expect_truncated(m.N, start, lp, h_over_k);
  }
  return out;
}

}  // namespace ara

#endif  // ARA_MODEL_HPP
