// Tests for the Monte-Carlo channel simulator: reproducibility (bitwise
// identical tallies for any thread count), fidelity of the sampled traffic
// law, exact decoder behaviour on crafted signals (noiseless recovery, ties,
// coherent alarm addition), and the error-accounting conventions.
#include <cmath>
#include <cstdint>
#include <vector>

#include "ara/model.hpp"
#include "ara/prob.hpp"
#include "ara/simulator.hpp"
#include "catch2/catch_amalgamated.hpp"

using namespace ara;

namespace {

bool same_tally(const TrialTally& a, const TrialTally& b) {
  return a.trials == b.trials && a.alarm_trials == b.alarm_trials &&
         a.no_alarm_trials == b.no_alarm_trials && a.alarm_missed == b.alarm_missed &&
         a.false_positive == b.false_positive &&
         a.std_errors_no_alarm == b.std_errors_no_alarm &&
         a.std_errors_alarm == b.std_errors_alarm &&
         a.ka_correct_alarm == b.ka_correct_alarm &&
         a.ka_misestimate == b.ka_misestimate;
}

}  // namespace

TEST_CASE("campaign tallies are reproducible and thread-count independent") {
  const CorrelationModel m = CorrelationModel::with_count(0.4, 0.2, 0.5, 6, 2, 8);
  const ChannelConfig cfg{64, 0.5, pos_inf};
  const TrialTally one = run_campaign(m, cfg, 300, 42, 1);
  const TrialTally three = run_campaign(m, cfg, 300, 42, 3);
  const TrialTally seven = run_campaign(m, cfg, 300, 42, 7);
  const TrialTally excess = run_campaign(m, cfg, 300, 42, 512);  // > trials
  REQUIRE(one.trials == 300);
  REQUIRE(one.alarm_trials + one.no_alarm_trials == 300);
  REQUIRE(same_tally(one, three));
  REQUIRE(same_tally(one, seven));
  REQUIRE(same_tally(one, excess));
  const TrialTally other = run_campaign(m, cfg, 300, 43, 1);
  REQUIRE_FALSE(same_tally(one, other));
}

TEST_CASE("traffic sampling follows the correlation model") {
  const CorrelationModel m = CorrelationModel::with_count(0.3, 0.5, 0.6, 50, 4, 8);
  Rng rng(2024);
  const long long draws = 4000;
  long long alarms = 0, device_draws = 0, alarm_sends = 0, std_sends = 0;
  for (long long i = 0; i < draws; ++i) {
    const Traffic t = generate_traffic(m, rng);
    REQUIRE(t.device_msg.size() == static_cast<std::size_t>(m.N));
    if (t.alarm) {
      ++alarms;
      REQUIRE(t.W0 >= 0);
      REQUIRE(t.W0 < m.M_a);
    } else {
      REQUIRE(t.W0 == -1);
    }
    for (long long msg : t.device_msg) {
      ++device_draws;
      REQUIRE(msg >= -1);
      REQUIRE(msg < m.M_a + m.M_s);
      if (msg >= 0 && msg < m.M_a) {
        ++alarm_sends;
        REQUIRE(t.alarm);
        REQUIRE(msg == t.W0);  // every detector repeats the common message
      } else if (msg >= m.M_a) {
        ++std_sends;
      }
    }
  }
  auto within = [](double got, double want, double sigma) {
    return std::abs(got - want) <= 4.0 * sigma;
  };
  const double nd = static_cast<double>(draws);
  const double dd = static_cast<double>(device_draws);
  const double Nd = static_cast<double>(m.N);
  // Devices within a trial share the alarm state, so the per-trial send
  // fractions are the right unit for the variance (not independent devices).
  const double p_alarm_send = m.p_a * m.p_d;
  const double var_alarm_send =
      m.p_a * (m.p_d * (1.0 - m.p_d) / Nd + m.p_d * m.p_d) - p_alarm_send * p_alarm_send;
  const double ps_quiet = m.p_s, ps_alarm = (1.0 - m.p_d) * m.p_s;
  const double p_std_send = (1.0 - m.p_a) * ps_quiet + m.p_a * ps_alarm;
  const double var_std_send =
      (1.0 - m.p_a) * (ps_quiet * (1.0 - ps_quiet) / Nd + ps_quiet * ps_quiet) +
      m.p_a * (ps_alarm * (1.0 - ps_alarm) / Nd + ps_alarm * ps_alarm) -
      p_std_send * p_std_send;
  REQUIRE(within(static_cast<double>(alarms) / nd, m.p_a,
                 std::sqrt(m.p_a * (1.0 - m.p_a) / nd)));
  REQUIRE(within(static_cast<double>(alarm_sends) / dd, p_alarm_send,
                 std::sqrt(var_alarm_send / nd)));
  REQUIRE(within(static_cast<double>(std_sends) / dd, p_std_send,
                 std::sqrt(var_std_send / nd)));
}

TEST_CASE("received signal adds identical messages coherently") {
  const CorrelationModel m = CorrelationModel::with_count(0.5, 0.1, 0.5, 4, 2, 3);
  const ChannelConfig cfg{32, 1.0, pos_inf};
  Rng cb_rng(7);
  const Codebook cb = generate_codebook(m, cfg, cb_rng);
  const std::vector<long long> msgs = {1, 1, 1};

  Rng tx_rng(99);
  const std::vector<double> y = transmit(cb, msgs, tx_rng);
  Rng noise_rng(99);  // replay the transmit noise stream
  for (long long i = 0; i < cfg.n; ++i) {
    const double z = noise_rng.normal();
    const double stacked = y[static_cast<std::size_t>(i)] - z;
    REQUIRE(stacked ==
            Catch::Approx(3.0 * cb.codewords[1][static_cast<std::size_t>(i)]).margin(1e-12));
  }
  REQUIRE_THROWS_AS(transmit(cb, {cb.M_a + cb.M_s}, tx_rng), std::domain_error);
}

TEST_CASE("power-capped codewords transmit nothing") {
  const CorrelationModel m = CorrelationModel::with_count(0.5, 0.1, 0.5, 4, 2, 3);
  const ChannelConfig cfg{32, 1.0, 1.3};
  Rng cb_rng(11);
  Codebook cb = generate_codebook(m, cfg, cb_rng);

  // Flags reflect the realized norm against n * P_max exactly.
  bool saw_capped = false, saw_free = false;
  for (std::size_t w = 0; w < cb.codewords.size(); ++w) {
    double norm2 = 0.0;
    for (double x : cb.codewords[w]) norm2 += x * x;
    REQUIRE(cb.power_capped[w] == (norm2 > static_cast<double>(cfg.n) * cfg.P_max));
    (cb.power_capped[w] ? saw_capped : saw_free) = true;
  }
  REQUIRE(saw_capped);
  REQUIRE(saw_free);

  // With every codeword flagged, the channel output is the bare noise.
  cb.power_capped.assign(cb.power_capped.size(), true);
  Rng tx_rng(5);
  const std::vector<double> y = transmit(cb, {0, 1, 2}, tx_rng);
  Rng noise_rng(5);
  for (double v : y) REQUIRE(v == noise_rng.normal());  // bitwise
}

TEST_CASE("decoder recovers a noiseless standard message and reports no alarm") {
  const CorrelationModel m = CorrelationModel::with_count(0.5, 0.1, 0.5, 4, 2, 2);
  const ChannelConfig cfg{128, 1.0, pos_inf};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Codebook cb = generate_codebook(m, cfg, rng);
    const long long v = cb.M_a + static_cast<long long>(seed % 2);
    const std::vector<double> y = cb.codewords[static_cast<std::size_t>(v)];
    const DecodeResult dec = decode(cb, y, 1);
    REQUIRE(dec.Ka_hat == 0);
    REQUIRE(dec.W_hat == -1);
    REQUIRE(dec.std_set == std::vector<long long>{v});
  }
}

TEST_CASE("zero received energy resolves the alarm tie to none") {
  const CorrelationModel m = CorrelationModel::with_count(0.5, 0.1, 0.5, 4, 2, 5);
  const ChannelConfig cfg{16, 1.0, pos_inf};
  Rng rng(3);
  const Codebook cb = generate_codebook(m, cfg, rng);
  const std::vector<double> y(static_cast<std::size_t>(cfg.n), 0.0);
  const DecodeResult dec = decode(cb, y, 3);
  REQUIRE(dec.W_hat == -1);
  REQUIRE(dec.Ka_hat == 0);
  REQUIRE(dec.std_set.size() == 3);  // still commits to min(K, M_s) messages
}

TEST_CASE("coherent alarm repetition makes detection easier") {
  const CorrelationModel m = CorrelationModel::with_count(0.5, 0.1, 0.5, 8, 2, 2);
  const std::uint64_t seeds = 200;
  auto miss_rate = [&](double P, long long copies) {
    const ChannelConfig cfg{48, P, pos_inf};
    long long missed = 0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      Rng rng(seed * 7919 + 1);
      const Codebook cb = generate_codebook(m, cfg, rng);
      std::vector<double> y(static_cast<std::size_t>(cfg.n));
      for (auto& v : y) v = rng.normal();
      for (long long i = 0; i < cfg.n; ++i)
        y[static_cast<std::size_t>(i)] +=
            static_cast<double>(copies) * cb.codewords[0][static_cast<std::size_t>(i)];
      const DecodeResult dec = decode(cb, y, copies);
      if (!(dec.Ka_hat >= 1 && dec.W_hat == 0)) ++missed;
    }
    return static_cast<double>(missed) / static_cast<double>(seeds);
  };
  // Find a power where a lone alarm transmitter is frequently lost.
  double P_marginal = 0.0, lone_miss = 0.0;
  for (double P : {0.002, 0.005, 0.01, 0.02, 0.05}) {
    const double r = miss_rate(P, 1);
    if (r >= 0.2 && r <= 0.95) {
      P_marginal = P;
      lone_miss = r;
      break;
    }
  }
  REQUIRE(P_marginal > 0.0);
  // Four devices repeating the same codeword add amplitudes, not powers:
  // sixteen-fold received energy rescues the detection.
  const double crowd_miss = miss_rate(P_marginal, 4);
  REQUIRE(crowd_miss < lone_miss);
  REQUIRE(crowd_miss <= lone_miss - 0.1);
}

TEST_CASE("subset enumeration refuses budget-busting searches") {
  const CorrelationModel m = CorrelationModel::with_count(0.5, 0.1, 0.5, 40, 2, 40);
  const ChannelConfig cfg{8, 1.0, pos_inf};
  Rng rng(17);
  const Codebook cb = generate_codebook(m, cfg, rng);
  const std::vector<double> y(static_cast<std::size_t>(cfg.n), 0.0);
  REQUIRE_THROWS_AS(decode(cb, y, 20), std::domain_error);  // C(40,20) subsets
  const DecodeResult all = decode(cb, y, 40);               // C(40,40) = 1 subset
  REQUIRE(all.std_set.size() == 40);
}

TEST_CASE("campaign edge cases") {
  CorrelationModel m = CorrelationModel::with_count(0.5, 0.2, 0.5, 4, 2, 4);
  const ChannelConfig cfg{32, 0.5, pos_inf};
  const TrialTally empty = run_campaign(m, cfg, 0, 1);
  REQUIRE(empty.trials == 0);
  REQUIRE(empty.alarm_missed_rate() == 0.0);
  REQUIRE(empty.false_positive_rate() == 0.0);
  REQUIRE_THROWS_AS(run_campaign(m, cfg, -1, 1), std::domain_error);

  m.p_a = 0.0;
  const TrialTally quiet = run_campaign(m, cfg, 100, 1);
  REQUIRE(quiet.alarm_trials == 0);
  REQUIRE(quiet.no_alarm_trials == 100);
  REQUIRE(quiet.alarm_missed_rate() == 0.0);
  REQUIRE(quiet.std_error_rate_alarm() == 0.0);
  REQUIRE(quiet.ka_misestimate_rate() == 0.0);

  // A model given only a payload size (no explicit message count) cannot
  // be simulated. A fractional payload has no message count to recover.
  const CorrelationModel payload_only =
      CorrelationModel::with_log2_count(0.5, 0.2, 0.5, 4, 2, 12.5);
  REQUIRE_THROWS_AS(run_campaign(payload_only, cfg, 10, 1), std::domain_error);
  Rng rng(1);
  REQUIRE_THROWS_AS(generate_codebook(payload_only, cfg, rng), std::domain_error);
  REQUIRE_THROWS_AS(generate_traffic(payload_only, rng), std::domain_error);
}

TEST_CASE("guaranteed collisions are charged to every colliding device") {
  // One standard message and everyone sends it: no decoder can tell the
  // senders apart, so the per-device error fraction is exactly one.
  const CorrelationModel m = CorrelationModel::with_count(0.0, 1.0, 0.5, 4, 2, 1);
  const ChannelConfig cfg{64, 1.0, pos_inf};
  const TrialTally tally = run_campaign(m, cfg, 50, 9);
  REQUIRE(tally.no_alarm_trials == 50);
  REQUIRE(tally.std_error_rate_no_alarm() == 1.0);
}

TEST_CASE("tally merge adds every field") {
  TrialTally a;
  a.trials = 3;
  a.alarm_trials = 2;
  a.no_alarm_trials = 1;
  a.alarm_missed = 1;
  a.false_positive = 1;
  a.std_errors_no_alarm = 0.5;
  a.std_errors_alarm = 0.25;
  a.ka_correct_alarm = 1;
  a.ka_misestimate = 1;
  TrialTally b = a;
  b.trials = 5;
  a.merge(b);
  REQUIRE(a.trials == 8);
  REQUIRE(a.alarm_trials == 4);
  REQUIRE(a.no_alarm_trials == 2);
  REQUIRE(a.alarm_missed == 2);
  REQUIRE(a.false_positive == 2);
  REQUIRE(a.std_errors_no_alarm == 1.0);
  REQUIRE(a.std_errors_alarm == 0.5);
  REQUIRE(a.ka_correct_alarm == 2);
  REQUIRE(a.ka_misestimate == 2);
  REQUIRE(a.alarm_missed_rate() == 0.5);
  REQUIRE(a.false_positive_rate() == 1.0);
  REQUIRE(a.ka_misestimate_rate() == 1.0);
}
