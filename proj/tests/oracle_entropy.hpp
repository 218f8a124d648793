#ifndef ARA_TESTS_ORACLE_ENTROPY_HPP
#define ARA_TESTS_ORACLE_ENTROPY_HPP

// Independent brute-force oracle for the joint entropy of the K received
// messages in a tiny system: enumerate every assignment of messages to the
// K active devices, compute its exact probability by summing over the alarm
// state and alarm-message value, and take the entropy of the normalized
// distribution. Exponential in K — only for toy configurations.

#include <cmath>
#include <vector>

#include "ara/model.hpp"

namespace ara_tests {

// Joint entropy H(W_1..W_K | first K devices active, rest silent) in bits.
inline double oracle_entropy_bits(const ara::CorrelationModel& m, long long K) {
  const long long M = m.M_a + m.M_s;
  const long double pa = m.p_a, ps = m.p_s, pd = m.p_d;
  const long double silent_alarm = (1.0L - pd) * (1.0L - ps);
  const long double silent_quiet = 1.0L - ps;

  std::vector<long long> w(static_cast<std::size_t>(K), 0);
  std::vector<long double> probs;
  probs.reserve(static_cast<std::size_t>(std::pow(static_cast<double>(M),
                                                  static_cast<double>(K))));
  long double total = 0.0L;
  bool carry = false;
  while (!carry) {
    long double p = 0.0L;
    // Quiet world: only standard messages are possible.
    {
      long double q = (1.0L - pa);
      for (long long j = 0; j < K; ++j)
        q *= w[static_cast<std::size_t>(j)] >= m.M_a
                 ? ps / static_cast<long double>(m.M_s)
                 : 0.0L;
      for (long long j = K; j < m.N; ++j) q *= silent_quiet;
      p += q;
    }
    // Alarm world: sum over the common alarm message value.
    for (long long w0 = 0; w0 < m.M_a; ++w0) {
      long double q = pa / static_cast<long double>(m.M_a);
      for (long long j = 0; j < K; ++j) {
        const long long wj = w[static_cast<std::size_t>(j)];
        long double f = 0.0L;
        if (wj == w0) f += pd;
        if (wj >= m.M_a) f += (1.0L - pd) * ps / static_cast<long double>(m.M_s);
        q *= f;
      }
      for (long long j = K; j < m.N; ++j) q *= silent_alarm;
      p += q;
    }
    probs.push_back(p);
    total += p;

    carry = true;
    for (long long j = 0; j < K && carry; ++j) {
      auto& d = w[static_cast<std::size_t>(j)];
      if (++d < M) {
        carry = false;
      } else {
        d = 0;
      }
    }
    if (K == 0) break;
  }

  long double h = 0.0L;
  for (long double p : probs) {
    if (p <= 0.0L) continue;
    const long double q = p / total;
    h -= q * std::log2(q);
  }
  return static_cast<double>(h);
}

}  // namespace ara_tests

#endif  // ARA_TESTS_ORACLE_ENTROPY_HPP
