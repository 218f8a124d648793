#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ara/model.hpp"
#include "oracle_entropy.hpp"

using namespace ara;

TEST_CASE("model validation rejects bad parameters") {
  REQUIRE_THROWS_AS(CorrelationModel::with_count(-0.1, 0.5, 0.5, 4, 2, 4),
                    std::domain_error);
  REQUIRE_THROWS_AS(CorrelationModel::with_count(0.5, 1.5, 0.5, 4, 2, 4),
                    std::domain_error);
  REQUIRE_THROWS_AS(CorrelationModel::with_count(0.5, 0.5, 0.5, 0, 2, 4),
                    std::domain_error);
  REQUIRE_THROWS_AS(CorrelationModel::with_count(0.5, 0.5, 0.5, 4, 0, 4),
                    std::domain_error);
  REQUIRE_NOTHROW(CorrelationModel::with_count(0.0, 1.0, 1.0, 1, 1, 1));
}

TEST_CASE("with_log2_count recovers exact integer counts when representable") {
  const CorrelationModel a = CorrelationModel::with_log2_count(0.5, 0.1, 0.2, 10, 2, 3.0);
  REQUIRE(a.M_s == 8);
  const CorrelationModel b =
      CorrelationModel::with_log2_count(0.5, 0.1, 0.2, 10, 2, 100.0);
  REQUIRE(b.M_s == 0);
  REQUIRE(b.log2_Ms == 100.0);
}

TEST_CASE("activity pmfs are normalized, including very large populations") {
  Rng rng(2024);
  for (int draw = 0; draw < 100; ++draw) {
    const long long N = draw < 10 ? 20000 : 1 + static_cast<long long>(rng.uniform_below(2000));
    const double pa = 0.05 + 0.9 * rng.uniform();
    const double ps = 0.05 + 0.9 * rng.uniform();
    const double pd = 0.05 + 0.9 * rng.uniform();
    const CorrelationModel m = CorrelationModel::with_log2_count(pa, ps, pd, N, 4, 16.0);

    long double sum_alarm = 0.0L, sum_quiet = 0.0L;
    for (long long k = 0; k <= N; ++k) {
      sum_alarm += static_cast<long double>(p_k_given_alarm(m, k));
      sum_quiet += static_cast<long double>(p_k_given_no_alarm(m, k));
    }
    REQUIRE(static_cast<double>(sum_alarm) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(static_cast<double>(sum_quiet) == Catch::Approx(1.0).margin(1e-12));

    const long long K = 1 + static_cast<long long>(rng.uniform_below(
                                static_cast<std::uint64_t>(std::min<long long>(N, 500))));
    long double sum_ka = 0.0L;
    for (long long ka = 0; ka <= K; ++ka)
      sum_ka += static_cast<long double>(p_ka_given_k(m, K, ka));
    REQUIRE(static_cast<double>(sum_ka) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("activity factorization: pmf product equals the split binomial form") {
  // The aggregates rely on P[K=Ka+Ks | A] P[Ka | K] factorizing into
  // independent detection and standard-activity binomials.
  const CorrelationModel m = CorrelationModel::with_count(0.4, 0.23, 0.37, 40, 2, 8);
  const double q = m.p_d + (1.0 - m.p_d) * m.p_s;
  for (long long ka = 0; ka <= m.N; ++ka) {
    for (long long ks = 0; ks + ka <= m.N && ks <= 12; ++ks) {
      const long long K = ka + ks;
      const double lhs = p_k_given_alarm(m, K) * p_ka_given_k(m, K, ka);
      const double bin_ka = std::exp(log_binomial(m.N, ka)) * std::pow(m.p_d, ka) *
                            std::pow(1.0 - m.p_d, static_cast<double>(m.N - ka));
      const double bin_ks = std::exp(log_binomial(m.N - ka, ks)) * std::pow(m.p_s, ks) *
                            std::pow(1.0 - m.p_s, static_cast<double>(m.N - ka - ks));
      REQUIRE(lhs == Catch::Approx(bin_ka * bin_ks).margin(1e-12));
    }
  }
  REQUIRE(q == Catch::Approx(m.p_d + (1 - m.p_d) * m.p_s));
}

TEST_CASE("independent-activation collapse: p_d = 0 gives (K/n) log2 M_s exactly") {
  const CorrelationModel m = CorrelationModel::with_log2_count(0.7, 0.01, 0.0, 1000, 8, 100.0);
  for (long long K : {1LL, 10LL, 100LL}) {
    const double expected = static_cast<double>(K) / 30000.0 * 100.0;
    REQUIRE(std::abs(spectral_efficiency(m, K, 30000) - expected) <= 1e-9 * expected);
    REQUIRE(conditional_entropy_term(m, K, K) == Catch::Approx(100.0).epsilon(1e-12));
  }
}

TEST_CASE("no-alarm collapse: p_a = 0 gives log2 M_s per message") {
  const CorrelationModel m = CorrelationModel::with_log2_count(0.0, 0.3, 0.6, 50, 4, 24.0);
  for (long long K : {1LL, 7LL, 50LL})
    for (long long k = 1; k <= std::min<long long>(K, 5); ++k)
      REQUIRE(conditional_entropy_term(m, K, k) == 24.0);
}

TEST_CASE("certain-detection endpoint: p_d = 1 leaves only the alarm index") {
  // With p_a = 1 and p_d = 1 every device transmits the alarm message, so a
  // partial activity pattern (K < N) is the limit of a detection-probability
  // sweep: the first reception identifies which alarm message was sent
  // (log2 M_a bits) and every later reception repeats it.
  const CorrelationModel m = CorrelationModel::with_log2_count(1.0, 0.01, 1.0, 40, 8, 64.0);
  for (long long K : {1LL, 5LL, 39LL}) {
    REQUIRE(conditional_entropy_term(m, K, 1) == 3.0);
    for (long long k = 2; k <= std::min<long long>(K, 4); ++k)
      REQUIRE(conditional_entropy_term(m, K, k) == 0.0);
    REQUIRE(spectral_efficiency(m, K, 300) == 0.01);
  }
  // The endpoint continues the sweep: values just below p_d = 1 approach it.
  CorrelationModel near = m;
  near.p_d = 1.0 - 1e-7;
  REQUIRE(spectral_efficiency(near, 5, 300) ==
          Catch::Approx(spectral_efficiency(m, 5, 300)).margin(1e-4));
  // A full pattern needs no limit and must agree with the direct formula.
  REQUIRE(conditional_entropy_term(m, m.N, 1) == 3.0);
  // Genuinely impossible patterns with no swept-variable escape still throw.
  const CorrelationModel dead = CorrelationModel::with_count(0.0, 0.0, 0.0, 10, 2, 4);
  REQUIRE_THROWS_AS(conditional_entropy_term(dead, 3, 1), std::domain_error);
  CorrelationModel quiet_cert = CorrelationModel::with_count(0.0, 0.01, 1.0, 10, 2, 4);
  REQUIRE(conditional_entropy_term(quiet_cert, 3, 1) == 2.0);  // quiet world: log2 M_s
}

TEST_CASE("joint entropy matches the brute-force enumeration oracle") {
  for (double pa : {0.1, 0.5, 0.9}) {
    for (double pd : {0.1, 0.5, 0.9}) {
      for (double ps : {0.15, 0.5, 0.85}) {
        for (long long N : {2LL, 3LL, 4LL}) {
          const CorrelationModel m = CorrelationModel::with_count(pa, ps, pd, N, 2, 4);
          for (long long K = 1; K <= N; ++K) {
            const double oracle = ara_tests::oracle_entropy_bits(m, K);
            long double chain = 0.0L;
            for (long long k = 1; k <= K; ++k)
              chain += static_cast<long double>(conditional_entropy_term(m, K, k));
            REQUIRE(static_cast<double>(chain) == Catch::Approx(oracle).margin(1e-9));
          }
        }
      }
    }
  }
}

TEST_CASE("mean entropy per active device matches the uncorrelated closed form") {
  const CorrelationModel m = CorrelationModel::with_log2_count(0.6, 0.02, 0.0, 400, 8, 60.0);
  const double coverage = 1.0 - std::pow(1.0 - m.p_s, static_cast<double>(m.N));
  REQUIRE(mean_entropy_per_active_device(m, 1000) ==
          Catch::Approx(coverage * 60.0).epsilon(1e-10));
  // Correlation can only reduce it: detectors repeat a common message.
  const CorrelationModel mc = CorrelationModel::with_log2_count(0.6, 0.02, 0.3, 400, 8, 60.0);
  REQUIRE(mean_entropy_per_active_device(mc, 1000) <
          mean_entropy_per_active_device(m, 1000));
}

TEST_CASE("truncated expectation matches the full sum and reports its mass") {
  const long long N = 50;
  const double p = 0.3;
  auto lp = [&](long long k) {
    return log_binomial(N, k) + static_cast<double>(k) * std::log(p) +
           static_cast<double>(N - k) * std::log1p(-p);
  };
  auto f = [](long long k) { return static_cast<double>(k * k); };
  long double direct = 0.0L;
  for (long long k = 0; k <= N; ++k)
    direct += std::exp(static_cast<long double>(lp(k))) * f(k);
  double mass = 0.0;
  const double got = detail::expect_truncated(N, 15, lp, f, 1e-14, &mass);
  REQUIRE(got == Catch::Approx(static_cast<double>(direct)).epsilon(1e-11));
  REQUIRE(mass == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("truncated expectation abort threshold returns early with a partial sum") {
  const long long N = 200;
  const double p = 0.5;
  auto lp = [&](long long k) {
    return log_binomial(N, k) + static_cast<double>(N) * std::log(0.5);
  };
  auto one = [](long long) { return 1.0; };
  double mass = 0.0;
  const double partial = detail::expect_truncated(N, 100, lp, one, 1e-12, &mass, 0.25);
  REQUIRE(partial >= 0.25);  // stopped as soon as the target was proven
  REQUIRE(mass < 1.0);
  REQUIRE(p == 0.5);
}
