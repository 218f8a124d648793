#ifndef ARA_SIMULATOR_HPP
#define ARA_SIMULATOR_HPP

// Toy-scale Monte-Carlo simulation of the random-code construction behind
// the achievability bounds: every trial draws a fresh Gaussian codebook
// (bounding the ensemble average, not one fixed code), runs the two-step
// decoder — joint alarm message/multiplicity estimation, interference
// cancellation, then exact subset decoding of the standard messages — and
// tallies each error event so empirical rates can be checked against the
// analytical bounds.
//
// Message/codeword indexing: one shared codebook of M_a + M_s codewords;
// indices [0, M_a) are the alarm messages, [M_a, M_a + M_s) the standard
// messages. A device's message is its codebook index, or -1 when silent.

#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ara/bounds.hpp"
#include "ara/model.hpp"
#include "ara/prob.hpp"

namespace ara {

struct Codebook {
  long long n = 0;
  long long M_a = 0;
  long long M_s = 0;
  std::vector<std::vector<double>> codewords;  // M_a + M_s rows of length n
  std::vector<bool> power_capped;  // true: norm exceeded n*P_max, transmit zeros
};

// Draw a fresh codebook of M_a + M_s i.i.d. N(0, P_avg) codewords; mark the
// ones whose realized power violates the cap (those transmit all-zeros, but
// the decoder still uses the drawn codeword — it does not know the flags).
inline Codebook generate_codebook(const CorrelationModel& m, const ChannelConfig& cfg,
                                  Rng& rng) {
  m.validate();
  cfg.validate();
  if (m.M_s < 1)
    throw std::domain_error(
        "generate_codebook: simulation needs an explicit standard-message count");
  Codebook cb;
  cb.n = cfg.n;
  cb.M_a = m.M_a;
  cb.M_s = m.M_s;
  const long long M = m.M_a + m.M_s;
  cb.codewords.assign(static_cast<std::size_t>(M), {});
  cb.power_capped.assign(static_cast<std::size_t>(M), false);
  const double scale = std::sqrt(cfg.P_avg);
  const double cap = static_cast<double>(cfg.n) * cfg.P_max;
  for (long long w = 0; w < M; ++w) {
    auto& c = cb.codewords[static_cast<std::size_t>(w)];
    c.resize(static_cast<std::size_t>(cfg.n));
    double norm2 = 0.0;
    for (auto& x : c) {
      x = scale * rng.normal();
      norm2 += x * x;
    }
    if (norm2 > cap) cb.power_capped[static_cast<std::size_t>(w)] = true;
  }
  return cb;
}

// One realized traffic pattern.
struct Traffic {
  bool alarm = false;
  long long W0 = -1;  // common alarm message, -1 when no alarm occurred
  std::vector<long long> device_msg;  // codebook index per device, -1 = silent
};

// Sample the alarm state and per-device messages. Fixed draw order (alarm
// flag, alarm message, then per device: detection, standard-transmit choice,
// standard message — all drawn whether used or not) keeps the stream aligned
// for reproducibility.
inline Traffic generate_traffic(const CorrelationModel& m, Rng& rng) {
  m.validate();
  if (m.M_s < 1)
    throw std::domain_error(
        "generate_traffic: simulation needs an explicit standard-message count");
  Traffic t;
  t.alarm = rng.uniform() < m.p_a;
  const long long w0 = static_cast<long long>(
      rng.uniform_below(static_cast<std::uint64_t>(m.M_a)));
  t.W0 = t.alarm ? w0 : -1;
  t.device_msg.assign(static_cast<std::size_t>(m.N), -1);
  for (long long j = 0; j < m.N; ++j) {
    const double u = rng.uniform();  // detection draw
    const double v = rng.uniform();  // standard-transmission draw
    const long long s = static_cast<long long>(
        rng.uniform_below(static_cast<std::uint64_t>(m.M_s)));
    long long msg = -1;
    if (t.alarm && u < m.p_d)
      msg = w0;
    else if (v < m.p_s)
      msg = m.M_a + s;
    t.device_msg[static_cast<std::size_t>(j)] = msg;
  }
  return t;
}

inline std::vector<long long> active_messages(const Traffic& t) {
  std::vector<long long> msgs;
  for (long long msg : t.device_msg)
    if (msg >= 0) msgs.push_back(msg);
  return msgs;
}

// Y = sum of transmitted codewords + standard Gaussian noise. Power-capped
// codewords transmit zeros; identical messages add coherently.
inline std::vector<double> transmit(const Codebook& cb,
                                    const std::vector<long long>& messages, Rng& rng) {
  std::vector<double> y(static_cast<std::size_t>(cb.n));
  for (auto& v : y) v = rng.normal();
  for (long long msg : messages) {
    if (msg < 0 || msg >= cb.M_a + cb.M_s)
      throw std::domain_error("transmit: message index out of range");
    if (cb.power_capped[static_cast<std::size_t>(msg)]) continue;
    const auto& c = cb.codewords[static_cast<std::size_t>(msg)];
    for (long long i = 0; i < cb.n; ++i)
      y[static_cast<std::size_t>(i)] += c[static_cast<std::size_t>(i)];
  }
  return y;
}

struct DecodeResult {
  long long W_hat = -1;   // decoded alarm message, -1 = none reported
  long long Ka_hat = 0;   // estimated alarm multiplicity
  std::vector<long long> std_set;  // decoded standard messages (codebook indices)
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace detail

// Two-step decoder. Step 1: exact argmin over alarm message W and
// multiplicity 0 <= K_a <= K of ||K_a c_W - Y||^2 (expanded so the constant
// ||Y||^2 drops); ties keep the first candidate in (W ascending, K_a
// ascending) order, so K_a = 0 — where every W scores alike — resolves to
// W = 0 and reports "no alarm". Step 2: subtract the estimated alarm
// contribution and exactly minimize the residual distance over all subsets
// of min(K - K_a, M_s) standard messages, enumerated in lexicographic order
// (first best kept: lowest-index tie-break).
inline DecodeResult decode(const Codebook& cb, const std::vector<double>& y, long long K,
                           double subset_budget = 1e6) {
  if (K < 0) throw std::domain_error("decode: K must be >= 0");
  DecodeResult r;
  double best = pos_inf;
  for (long long w = 0; w < cb.M_a; ++w) {
    const auto& c = cb.codewords[static_cast<std::size_t>(w)];
    const double c2 = detail::dot(c, c);
    const double cy = detail::dot(c, y);
    for (long long ka = 0; ka <= K; ++ka) {
      const double kad = static_cast<double>(ka);
      const double score = kad * kad * c2 - 2.0 * kad * cy;
      if (score < best) {
        best = score;
        r.W_hat = w;
        r.Ka_hat = ka;
      }
    }
  }
  if (r.Ka_hat < 1) r.W_hat = -1;

  // Interference cancellation with the decoded alarm contribution.
  std::vector<double> resid = y;
  if (r.Ka_hat >= 1) {
    const auto& c = cb.codewords[static_cast<std::size_t>(r.W_hat)];
    const double kad = static_cast<double>(r.Ka_hat);
    for (long long i = 0; i < cb.n; ++i)
      resid[static_cast<std::size_t>(i)] -= kad * c[static_cast<std::size_t>(i)];
  }

  const long long t = std::min(K - r.Ka_hat, cb.M_s);
  if (t <= 0) return r;
  if (log_binomial(cb.M_s, t) > std::log(subset_budget))
    throw std::domain_error("decode: standard-message subset count exceeds the budget");

  // Gram matrix over standard codewords; residual scored by
  // sum_i (||c_i||^2 - 2<c_i, resid>) + 2 sum_{i<j} <c_i, c_j>.
  const std::size_t ms = static_cast<std::size_t>(cb.M_s);
  std::vector<double> self(ms), cross(ms);
  std::vector<std::vector<double>> gram(ms, std::vector<double>(ms, 0.0));
  for (std::size_t i = 0; i < ms; ++i) {
    const auto& ci = cb.codewords[static_cast<std::size_t>(cb.M_a) + i];
    self[i] = detail::dot(ci, ci) - 2.0 * detail::dot(ci, resid);
    for (std::size_t j = 0; j <= i; ++j) {
      const auto& cj = cb.codewords[static_cast<std::size_t>(cb.M_a) + j];
      gram[i][j] = gram[j][i] = detail::dot(ci, cj);
    }
  }
  std::vector<long long> chosen, best_set;
  double best_score = pos_inf;
  // Depth-first lexicographic enumeration of all t-subsets with an
  // incrementally maintained score.
  auto dfs = [&](auto&& self_fn, std::size_t from, long long left, double score) -> void {
    if (left == 0) {
      if (score < best_score) {
        best_score = score;
        best_set = chosen;
      }
      return;
    }
    for (std::size_t i = from; i + static_cast<std::size_t>(left) <= ms; ++i) {
      double s = score + self[i];
      for (long long j : chosen) s += 2.0 * gram[i][static_cast<std::size_t>(j)];
      chosen.push_back(static_cast<long long>(i));
      self_fn(self_fn, i + 1, left - 1, s);
      chosen.pop_back();
    }
  };
  dfs(dfs, 0, t, 0.0);
  r.std_set.reserve(best_set.size());
  for (long long i : best_set) r.std_set.push_back(cb.M_a + i);
  return r;
}

// Accumulated error-event tallies. All fields are sums, so partial tallies
// merge by addition; the rate helpers divide by the matching denominators.
struct TrialTally {
  long long trials = 0;
  long long alarm_trials = 0;     // trials where an alarm occurred
  long long no_alarm_trials = 0;  // complement
  long long alarm_missed = 0;     // alarm trials without (Ka_hat >= 1 and W_hat = W0)
  long long false_positive = 0;   // no-alarm trials with Ka_hat >= 1
  double std_errors_no_alarm = 0.0;  // per-trial device-error fractions, quiet world
  double std_errors_alarm = 0.0;     // per-trial device-error fractions, alarm world
  long long ka_correct_alarm = 0;    // alarm trials with the alarm message decoded
  long long ka_misestimate = 0;      // of those, trials with Ka_hat != true K_a

  void merge(const TrialTally& o) {
    trials += o.trials;
    alarm_trials += o.alarm_trials;
    no_alarm_trials += o.no_alarm_trials;
    alarm_missed += o.alarm_missed;
    false_positive += o.false_positive;
    std_errors_no_alarm += o.std_errors_no_alarm;
    std_errors_alarm += o.std_errors_alarm;
    ka_correct_alarm += o.ka_correct_alarm;
    ka_misestimate += o.ka_misestimate;
  }

  static double rate(double num, double den) { return den > 0 ? num / den : 0.0; }
  double alarm_missed_rate() const {
    return rate(static_cast<double>(alarm_missed), static_cast<double>(alarm_trials));
  }
  double false_positive_rate() const {
    return rate(static_cast<double>(false_positive), static_cast<double>(no_alarm_trials));
  }
  double std_error_rate_no_alarm() const {
    return rate(std_errors_no_alarm, static_cast<double>(no_alarm_trials));
  }
  double std_error_rate_alarm() const {
    return rate(std_errors_alarm, static_cast<double>(alarm_trials));
  }
  double ka_misestimate_rate() const {
    return rate(static_cast<double>(ka_misestimate), static_cast<double>(ka_correct_alarm));
  }
};

namespace detail {

// Everything tallied from one trial; folding these in trial order makes the
// campaign result independent of how trials were distributed over threads.
struct TrialRecord {
  bool alarm = false;
  bool missed = false;
  bool false_pos = false;
  double std_frac = 0.0;
  bool ka_counted = false;  // alarm message decoded: K_a comparison applies
  bool ka_wrong = false;
};

inline TrialRecord run_trial(const CorrelationModel& m, const ChannelConfig& cfg,
                             std::uint64_t seed, double subset_budget) {
  Rng rng(seed);
  const Codebook cb = generate_codebook(m, cfg, rng);
  const Traffic traffic = generate_traffic(m, rng);
  const std::vector<long long> msgs = active_messages(traffic);
  const std::vector<double> y = transmit(cb, msgs, rng);
  const long long K = static_cast<long long>(msgs.size());
  const DecodeResult dec = decode(cb, y, K, subset_budget);

  TrialRecord rec;
  rec.alarm = traffic.alarm;
  long long true_ka = 0;
  for (long long msg : msgs)
    if (msg < m.M_a) ++true_ka;

  if (traffic.alarm) {
    const bool ok = dec.Ka_hat >= 1 && dec.W_hat == traffic.W0;
    rec.missed = !ok;
    if (ok) {
      rec.ka_counted = true;
      rec.ka_wrong = dec.Ka_hat != true_ka;
    }
  } else {
    rec.false_pos = dec.Ka_hat >= 1;
  }

  // Per-device standard-message errors: a standard sender errs when its
  // message is absent from the decoded set or another device sent the same
  // message (colliding devices cannot both be resolved).
  long long std_devices = 0, std_errors = 0;
  for (long long msg : msgs) {
    if (msg < m.M_a) continue;
    ++std_devices;
    long long copies = 0;
    for (long long other : msgs)
      if (other == msg) ++copies;
    bool in_set = false;
    for (long long s : dec.std_set)
      if (s == msg) in_set = true;
    if (!in_set || copies > 1) ++std_errors;
  }
  rec.std_frac = std_devices > 0
                     ? static_cast<double>(std_errors) / static_cast<double>(std_devices)
                     : 0.0;
  return rec;
}

}  // namespace detail

// Monte-Carlo campaign: `trials` independent trials, each with a fresh
// codebook, traffic pattern, and noise, all seeded from per-trial sub-seeds
// of `seed`. Records are folded in trial order, so the tally is identical
// for any thread count.
inline TrialTally run_campaign(const CorrelationModel& m, const ChannelConfig& cfg,
                               long long trials, std::uint64_t seed, int threads = 1,
                               double subset_budget = 1e6) {
  m.validate();
  cfg.validate();
  if (trials < 0) throw std::domain_error("run_campaign: trials must be >= 0");
  TrialTally tally;
  if (trials == 0) return tally;
  if (m.M_s < 1)
    throw std::domain_error(
        "run_campaign: simulation needs an explicit standard-message count");

  std::vector<detail::TrialRecord> records(static_cast<std::size_t>(trials));
  const int workers =
      static_cast<int>(std::max<long long>(1, std::min<long long>(threads, trials)));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&](long long from, long long to) {
    try {
      for (long long i = from; i < to; ++i)
        records[static_cast<std::size_t>(i)] =
            detail::run_trial(m, cfg, sub_seed(seed, static_cast<std::uint64_t>(i)),
                              subset_budget);
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0, trials);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long long chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long long from = static_cast<long long>(w) * chunk;
      const long long to = std::min(trials, from + chunk);
      if (from >= to) break;
      pool.emplace_back(work, from, to);
    }
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& rec : records) {
    ++tally.trials;
    if (rec.alarm) {
      ++tally.alarm_trials;
      if (rec.missed) ++tally.alarm_missed;
      tally.std_errors_alarm += rec.std_frac;
      if (rec.ka_counted) {
        ++tally.ka_correct_alarm;
        if (rec.ka_wrong) ++tally.ka_misestimate;
      }
    } else {
      ++tally.no_alarm_trials;
      if (rec.false_pos) ++tally.false_positive;
      tally.std_errors_no_alarm += rec.std_frac;
    }
  }
  return tally;
}

}  // namespace ara

#endif  // ARA_SIMULATOR_HPP
