#ifndef ARA_CONFIG_HPP
#define ARA_CONFIG_HPP

// Declarative experiment configuration: one JSON document describing the
// traffic model, channel, reliability targets, search effort, sweep grids,
// and run parameters. Every command consumes an ExperimentConfig; the JSON
// form round-trips losslessly so emitted tables can embed the exact resolved
// configuration as an audit trail.

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ara/bounds.hpp"
#include "ara/model.hpp"

namespace ara {

struct ExperimentConfig {
  std::string scenario = "baseline";

  CorrelationModel model = CorrelationModel::with_log2_count(1.0, 0.01, 0.0115, 1000, 8, 100.0);
  ChannelConfig channel{30000, 0.0067, pos_inf};
  ReliabilityTargets targets{1e-5, 1e-1, 1e-1, 1e-5};
  ExponentSearchConfig search{24, 1e-9, 1e3, 20, 0};

  std::vector<long long> K_grid{1, 5, 10, 20, 50, 100};     // entropy rows
  std::vector<double> pd_grid{0.0, 0.002, 0.005, 0.01, 0.02, 0.05};
  std::vector<long long> N_grid{500, 1000};                 // power sweep
  std::vector<double> pa_list{0.25, 0.5, 1.0};

  long long trials = 2000;
  std::uint64_t seed = 1234;
  int threads = 1;
  std::string format;  // "csv" | "json"; empty = per-command default
  bool db = false;     // report energy per bit in decibels
  std::string out;     // output path; empty = standard output
  double tol = 1e-4;   // relative power-bisection tolerance
  double subset_budget = 1e6;
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& field, const std::string& what) {
  throw std::runtime_error("config field '" + field + "': " + what);
}

inline void check_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok)
      config_fail(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
  }
}

template <class T>
void read_number(const json& j, const std::string& field, const char* key, T& dst) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number())
    config_fail(field, "expected a number, got " + std::string(v.type_name()));
  dst = v.get<T>();
}

inline void read_bool(const json& j, const std::string& field, const char* key, bool& dst) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_boolean())
    config_fail(field, "expected true/false, got " + std::string(v.type_name()));
  dst = v.get<bool>();
}

inline void read_string(const json& j, const std::string& field, const char* key,
                        std::string& dst) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_string())
    config_fail(field, "expected a string, got " + std::string(v.type_name()));
  dst = v.get<std::string>();
}

// P_max may be infinite; JSON has no infinity literal, so the string "inf"
// stands in for it.
inline void read_power_cap(const json& j, const std::string& field, const char* key,
                           double& dst) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") {
      dst = pos_inf;
      return;
    }
    config_fail(field, "expected a number or \"inf\"");
  }
  if (!v.is_number())
    config_fail(field, "expected a number or \"inf\", got " + std::string(v.type_name()));
  dst = v.get<double>();
}

template <class T>
void read_array(const json& j, const std::string& field, const char* key,
                std::vector<T>& dst) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array())
    config_fail(field, "expected an array, got " + std::string(v.type_name()));
  dst.clear();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      config_fail(field + "[" + std::to_string(i) + "]", "expected a number");
    dst.push_back(v[i].get<T>());
  }
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["model"] = {{"p_a", c.model.p_a}, {"p_s", c.model.p_s},   {"p_d", c.model.p_d},
                {"N", c.model.N},     {"M_a", c.model.M_a},   {"M_s", c.model.M_s},
                {"log2_Ms", c.model.log2_Ms}};
  j["channel"] = {{"n", c.channel.n}, {"P_avg", c.channel.P_avg}};
  if (std::isinf(c.channel.P_max))
    j["channel"]["P_max"] = "inf";
  else
    j["channel"]["P_max"] = c.channel.P_max;
  j["targets"] = {{"eps_a", c.targets.eps_a},
                  {"eps_s", c.targets.eps_s},
                  {"eps_sa", c.targets.eps_sa},
                  {"eps_fp", c.targets.eps_fp}};
  j["search"] = {{"rho_grid", c.search.rho_grid},
                 {"lambda_lo", c.search.lambda_lo},
                 {"lambda_hi", c.search.lambda_hi},
                 {"refine_iters", c.search.refine_iters},
                 {"qt_samples", c.search.qt_samples}};
  j["sweeps"] = {{"K_grid", c.K_grid},
                 {"pd_grid", c.pd_grid},
                 {"N_grid", c.N_grid},
                 {"pa_list", c.pa_list}};
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["format"] = c.format;
  j["db"] = c.db;
  j["out"] = c.out;
  j["tol"] = c.tol;
  j["subset_budget"] = c.subset_budget;
  return j;
}

// Parse a config document on top of the defaults: absent fields keep their
// default values, present fields must have the right type, unknown fields
// are rejected by name.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::check_keys;
  ExperimentConfig c;
  if (!j.is_object()) detail::config_fail("<root>", "expected a JSON object");
  check_keys(j, "",
             {"scenario", "model", "channel", "targets", "search", "sweeps", "trials",
              "seed", "threads", "format", "db", "out", "tol", "subset_budget"});
  detail::read_string(j, "scenario", "scenario", c.scenario);
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, "model", {"p_a", "p_s", "p_d", "N", "M_a", "M_s", "log2_Ms"});
    detail::read_number(m, "model.p_a", "p_a", c.model.p_a);
    detail::read_number(m, "model.p_s", "p_s", c.model.p_s);
    detail::read_number(m, "model.p_d", "p_d", c.model.p_d);
    detail::read_number(m, "model.N", "N", c.model.N);
    detail::read_number(m, "model.M_a", "M_a", c.model.M_a);
    detail::read_number(m, "model.M_s", "M_s", c.model.M_s);
    if (m.contains("log2_Ms")) {
      detail::read_number(m, "model.log2_Ms", "log2_Ms", c.model.log2_Ms);
    } else if (m.contains("M_s")) {
      if (c.model.M_s < 1)
        detail::config_fail("model.log2_Ms", "required when M_s is not a positive count");
      c.model.log2_Ms = std::log2(static_cast<double>(c.model.M_s));
    }
  }
  if (j.contains("channel")) {
    const auto& ch = j.at("channel");
    check_keys(ch, "channel", {"n", "P_avg", "P_max"});
    detail::read_number(ch, "channel.n", "n", c.channel.n);
    detail::read_number(ch, "channel.P_avg", "P_avg", c.channel.P_avg);
    detail::read_power_cap(ch, "channel.P_max", "P_max", c.channel.P_max);
  }
  if (j.contains("targets")) {
    const auto& t = j.at("targets");
    check_keys(t, "targets", {"eps_a", "eps_s", "eps_sa", "eps_fp"});
    detail::read_number(t, "targets.eps_a", "eps_a", c.targets.eps_a);
    detail::read_number(t, "targets.eps_s", "eps_s", c.targets.eps_s);
    detail::read_number(t, "targets.eps_sa", "eps_sa", c.targets.eps_sa);
    detail::read_number(t, "targets.eps_fp", "eps_fp", c.targets.eps_fp);
  }
  if (j.contains("search")) {
    const auto& s = j.at("search");
    check_keys(s, "search",
               {"rho_grid", "lambda_lo", "lambda_hi", "refine_iters", "qt_samples"});
    detail::read_number(s, "search.rho_grid", "rho_grid", c.search.rho_grid);
    detail::read_number(s, "search.lambda_lo", "lambda_lo", c.search.lambda_lo);
    detail::read_number(s, "search.lambda_hi", "lambda_hi", c.search.lambda_hi);
    detail::read_number(s, "search.refine_iters", "refine_iters", c.search.refine_iters);
    detail::read_number(s, "search.qt_samples", "qt_samples", c.search.qt_samples);
  }
  if (j.contains("sweeps")) {
    const auto& s = j.at("sweeps");
    check_keys(s, "sweeps", {"K_grid", "pd_grid", "N_grid", "pa_list"});
    detail::read_array(s, "sweeps.K_grid", "K_grid", c.K_grid);
    detail::read_array(s, "sweeps.pd_grid", "pd_grid", c.pd_grid);
    detail::read_array(s, "sweeps.N_grid", "N_grid", c.N_grid);
    detail::read_array(s, "sweeps.pa_list", "pa_list", c.pa_list);
  }
  detail::read_number(j, "trials", "trials", c.trials);
  detail::read_number(j, "seed", "seed", c.seed);
  detail::read_number(j, "threads", "threads", c.threads);
  detail::read_string(j, "format", "format", c.format);
  detail::read_bool(j, "db", "db", c.db);
  detail::read_string(j, "out", "out", c.out);
  detail::read_number(j, "tol", "tol", c.tol);
  detail::read_number(j, "subset_budget", "subset_budget", c.subset_budget);
  if (!c.format.empty() && c.format != "csv" && c.format != "json")
    detail::config_fail("format", "expected \"csv\" or \"json\"");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

// Single-line JSON echo of the fully resolved configuration, embedded in
// every output as the audit trail.
inline std::string resolved_config_line(const ExperimentConfig& c) {
  return to_json(c).dump();
}

}  // namespace ara

#endif  // ARA_CONFIG_HPP
