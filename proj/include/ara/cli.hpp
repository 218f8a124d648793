#ifndef ARA_CLI_HPP
#define ARA_CLI_HPP

// Command implementations behind the ara_cli front end. Each command takes a
// resolved ExperimentConfig, writes data to `out` and diagnostics/progress to
// `err`, and returns its process exit code (0 = completed and all requested
// verdicts passed). Tables are CSV (RFC-4180 quoting) and reports JSON; both
// carry the fully resolved configuration so any output file can be rerun.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "ara/config.hpp"
#include "ara/model.hpp"
#include "ara/optimizer.hpp"
#include "ara/simulator.hpp"

namespace ara {

namespace detail {

// Shortest round-trip decimal form, locale-independent.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(long long v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "true" : "false"; }

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

inline void csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << csv_quote(cells[i]);
  }
  out << '\n';
}

inline void csv_config_comment(std::ostream& out, const ExperimentConfig& cfg) {
  out << "# config=" << resolved_config_line(cfg) << '\n';
}

inline std::string resolve_format(const ExperimentConfig& cfg, bool report) {
  if (!cfg.format.empty()) return cfg.format;
  return report ? "json" : "csv";
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace detail

// Per-K spectral efficiency and the newest conditional entropy term.
inline int cmd_entropy(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.model.validate();
    const bool json_out = detail::resolve_format(cfg, false) == "json";
    nlohmann::json rows = nlohmann::json::array();
    if (!json_out) {
      detail::csv_config_comment(out, cfg);
      detail::csv_row(out, {"K", "S", "H_K"});
    }
    for (long long K : cfg.K_grid) {
      const double S = spectral_efficiency(cfg.model, K, cfg.channel.n);
      const double hk = K >= 1 ? conditional_entropy_term(cfg.model, K, K) : 0.0;
      if (json_out)
        rows.push_back({{"K", K}, {"S", S}, {"H_K", hk}});
      else
        detail::csv_row(out, {detail::fmt(K), detail::fmt(S), detail::fmt(hk)});
    }
    if (json_out) {
      nlohmann::json doc;
      doc["config"] = to_json(cfg);
      doc["rows"] = rows;
      out << doc.dump() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    err << "entropy: " << e.what() << '\n';
    return 1;
  }
}

// Alarm-reliability / spectral-efficiency trade-off over a p_d grid, at the
// power calibrated against the standard and false-positive targets.
inline int cmd_tradeoff(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    double P_cal = 0.0;
    const std::vector<TradeoffRow> rows = sweep_alarm_tradeoff(
        cfg.model, cfg.channel.n, cfg.pd_grid, cfg.targets, cfg.search, &P_cal, cfg.tol);
    if (detail::resolve_format(cfg, false) == "json") {
      nlohmann::json doc;
      doc["config"] = to_json(cfg);
      doc["P_avg"] = P_cal;
      doc["rows"] = nlohmann::json::array();
      for (const auto& r : rows)
        doc["rows"].push_back({{"p_d", r.p_d},
                               {"S", r.spectral_efficiency},
                               {"eps_a_bound", r.eps_a_bound}});
      out << doc.dump() << '\n';
    } else {
      detail::csv_config_comment(out, cfg);
      out << "# calibrated_P_avg=" << detail::fmt(P_cal) << '\n';
      detail::csv_row(out, {"p_d", "S", "eps_a_bound"});
      for (const auto& r : rows)
        detail::csv_row(out, {detail::fmt(r.p_d), detail::fmt(r.spectral_efficiency),
                              detail::fmt(r.eps_a_bound)});
    }
    return 0;
  } catch (const std::exception& e) {
    err << "tradeoff: " << e.what() << '\n';
    return 1;
  }
}

// Minimum-power operating points over the device-count grid, one row per
// (N, p_a) plus an uncorrelated reference row per N.
inline int cmd_power(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const bool json_out = detail::resolve_format(cfg, false) == "json";
    const std::string energy_col = cfg.db ? "energy_per_bit_db" : "energy_per_bit";
    nlohmann::json jrows = nlohmann::json::array();
    if (!json_out) {
      detail::csv_config_comment(out, cfg);
      detail::csv_row(out,
                      {"N", "p_a", "P_avg", "p_d", energy_col, "feasible", "correlated"});
    }
    for (long long N : cfg.N_grid) {
      err << "power: solving N=" << N << '\n';
      const std::vector<PowerSweepRow> rows = sweep_power(
          cfg.model, cfg.channel.n, {N}, cfg.pa_list, cfg.targets, cfg.search, cfg.tol);
      for (const auto& r : rows) {
        const double energy = cfg.db ? detail::to_db(r.energy_per_bit) : r.energy_per_bit;
        if (json_out)
          jrows.push_back({{"N", r.N},
                           {"p_a", r.p_a},
                           {"P_avg", r.P_avg},
                           {"p_d", r.p_d},
                           {energy_col, energy},
                           {"feasible", r.feasible},
                           {"correlated", r.correlated}});
        else
          detail::csv_row(out, {detail::fmt(r.N), detail::fmt(r.p_a), detail::fmt(r.P_avg),
                                detail::fmt(r.p_d), detail::fmt(energy),
                                detail::fmt(r.feasible), detail::fmt(r.correlated)});
      }
    }
    if (json_out) {
      nlohmann::json doc;
      doc["config"] = to_json(cfg);
      doc["rows"] = jrows;
      out << doc.dump() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    err << "power: " << e.what() << '\n';
    return 1;
  }
}

namespace detail {

struct DominationCheck {
  std::string constraint;
  double empirical = 0.0;
  double bound = 1.0;
  double halfwidth = 1.0;
  long long denominator = 0;
  bool pass = true;
};

}  // namespace detail

// Monte-Carlo campaign with side-by-side analytical bounds: each empirical
// error frequency must not exceed its bound by more than the Wilson 95%
// half-width of the estimate.
inline int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const bool json_out = detail::resolve_format(cfg, true) == "json";
    TrialTally tally;
    std::vector<detail::DominationCheck> checks;
    bool all_pass = true;
    if (cfg.trials > 0) {
      tally = run_campaign(cfg.model, cfg.channel, cfg.trials, cfg.seed, cfg.threads,
                           cfg.subset_budget);
      const BoundSet bs = eps_bounds(cfg.model, cfg.channel, cfg.search);
      auto add = [&](const std::string& name, double emp, double bound, long long den) {
        detail::DominationCheck c;
        c.constraint = name;
        c.empirical = emp;
        c.bound = bound;
        c.halfwidth = wilson_halfwidth(emp, static_cast<double>(den));
        c.denominator = den;
        c.pass = emp <= bound + c.halfwidth;
        all_pass = all_pass && c.pass;
        checks.push_back(c);
      };
      add("eps_a", tally.alarm_missed_rate(), bs.eps_a_bound, tally.alarm_trials);
      add("eps_s", tally.std_error_rate_no_alarm(), bs.eps_s_bound, tally.no_alarm_trials);
      add("eps_sa", tally.std_error_rate_alarm(), bs.eps_sa_bound, tally.alarm_trials);
      add("eps_fp", tally.false_positive_rate(), bs.eps_fp_bound, tally.no_alarm_trials);
    }
    if (json_out) {
      nlohmann::json doc;
      doc["config"] = to_json(cfg);
      doc["tally"] = {{"trials", tally.trials},
                      {"alarm_trials", tally.alarm_trials},
                      {"no_alarm_trials", tally.no_alarm_trials},
                      {"alarm_missed", tally.alarm_missed},
                      {"false_positive", tally.false_positive},
                      {"std_errors_no_alarm", tally.std_errors_no_alarm},
                      {"std_errors_alarm", tally.std_errors_alarm},
                      {"ka_correct_alarm", tally.ka_correct_alarm},
                      {"ka_misestimate", tally.ka_misestimate}};
      doc["rates"] = {{"alarm_missed", tally.alarm_missed_rate()},
                      {"false_positive", tally.false_positive_rate()},
                      {"std_error_no_alarm", tally.std_error_rate_no_alarm()},
                      {"std_error_alarm", tally.std_error_rate_alarm()},
                      {"ka_misestimate", tally.ka_misestimate_rate()}};
      doc["checks"] = nlohmann::json::array();
      for (const auto& c : checks)
        doc["checks"].push_back({{"constraint", c.constraint},
                                 {"empirical", c.empirical},
                                 {"bound", c.bound},
                                 {"halfwidth", c.halfwidth},
                                 {"denominator", c.denominator},
                                 {"pass", c.pass}});
      doc["all_pass"] = all_pass;
      out << doc.dump() << '\n';
    } else {
      detail::csv_config_comment(out, cfg);
      detail::csv_row(out,
                      {"metric", "empirical", "bound", "halfwidth", "denominator", "verdict"});
      for (const auto& c : checks)
        detail::csv_row(out, {c.constraint, detail::fmt(c.empirical), detail::fmt(c.bound),
                              detail::fmt(c.halfwidth), detail::fmt(c.denominator),
                              c.pass ? "PASS" : "FAIL"});
      detail::csv_row(out, {"ka_misestimate", detail::fmt(tally.ka_misestimate_rate()), "",
                            "", detail::fmt(tally.ka_correct_alarm), "INFO"});
    }
    return all_pass ? 0 : 1;
  } catch (const std::exception& e) {
    err << "simulate: " << e.what() << '\n';
    return 1;
  }
}

// Raw per-(K, K_a) bound terms plus the four aggregated constraint bounds.
inline int cmd_bounds(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const BoundSet bs = eps_bounds(cfg.model, cfg.channel, cfg.search);
    nlohmann::json aggregates = {{"eps_a", bs.eps_a_bound},
                                 {"eps_s", bs.eps_s_bound},
                                 {"eps_sa", bs.eps_sa_bound},
                                 {"eps_fp", bs.eps_fp_bound}};
    if (detail::resolve_format(cfg, false) == "json") {
      nlohmann::json doc;
      doc["config"] = to_json(cfg);
      doc["aggregates"] = aggregates;
      doc["terms"] = nlohmann::json::array();
      for (const auto& [key, t] : bs.per_k_terms)
        doc["terms"].push_back({{"K", key.first},
                                {"Ka", key.second},
                                {"a", t.a},
                                {"b", t.b},
                                {"c", t.c},
                                {"d", t.d},
                                {"e", t.e}});
      out << doc.dump() << '\n';
    } else {
      detail::csv_config_comment(out, cfg);
      out << "# aggregates=" << aggregates.dump() << '\n';
      detail::csv_row(out, {"K", "Ka", "a", "b", "c", "d", "e"});
      for (const auto& [key, t] : bs.per_k_terms)
        detail::csv_row(out, {detail::fmt(key.first), detail::fmt(key.second),
                              detail::fmt(t.a), detail::fmt(t.b), detail::fmt(t.c),
                              detail::fmt(t.d), detail::fmt(t.e)});
    }
    return 0;
  } catch (const std::exception& e) {
    err << "bounds: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ara

#endif  // ARA_CLI_HPP
