// ara_cli: command-line front end for the alarm random access library.
//
// Subcommands: entropy, tradeoff, power, simulate, bounds. Configuration is
// resolved in precedence order: command-line flag > ARA_THREADS environment
// variable (thread count only) > --config file field > built-in default.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "ara/cli.hpp"
#include "ara/config.hpp"

namespace {

struct FlagValues {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string format;
  bool db = false;
  std::string out;
  int threads = 0;
};

struct FlagOptions {
  CLI::Option* config = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* format = nullptr;
  CLI::Option* db = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* threads = nullptr;
};

FlagOptions add_common_flags(CLI::App* sub, FlagValues& v) {
  FlagOptions o;
  o.config = sub->add_option("--config", v.config_path, "Path to a JSON config file");
  o.seed = sub->add_option("--seed", v.seed, "RNG seed (unsigned 64-bit)");
  o.format = sub->add_option("--format", v.format, "Output format: csv or json")
                 ->check(CLI::IsMember({"csv", "json"}));
  o.db = sub->add_flag("--db", v.db, "Report energy per bit in decibels (10*log10)");
  o.out = sub->add_option("--out", v.out, "Write data to this file instead of stdout");
  o.threads = sub->add_option("--threads", v.threads, "Worker thread count")
                  ->check(CLI::PositiveNumber);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Achievability bounds, operating points, and Monte-Carlo validation "
               "for alarm random access on the Gaussian multiple-access channel"};
  app.require_subcommand(1);

  FlagValues flags;
  std::map<std::string, FlagOptions> opts;
  opts["entropy"] = add_common_flags(
      app.add_subcommand("entropy", "Spectral efficiency and entropy terms per K"), flags);
  opts["tradeoff"] = add_common_flags(
      app.add_subcommand("tradeoff", "Alarm reliability vs spectral efficiency over p_d"),
      flags);
  opts["power"] = add_common_flags(
      app.add_subcommand("power", "Minimum-power operating points over N and p_a"), flags);
  opts["simulate"] = add_common_flags(
      app.add_subcommand("simulate", "Monte-Carlo campaign checked against the bounds"),
      flags);
  opts["bounds"] = add_common_flags(
      app.add_subcommand("bounds", "Raw per-(K,K_a) bound terms and aggregates"), flags);

  CLI11_PARSE(app, argc, argv);

  const CLI::App* active = app.get_subcommands().front();
  const std::string name = active->get_name();
  const FlagOptions& o = opts[name];

  ara::ExperimentConfig cfg;
  try {
    if (o.config->count() > 0) cfg = ara::load_config(flags.config_path);
  } catch (const std::exception& e) {
    std::cerr << "ara_cli: " << e.what() << '\n';
    return 2;
  }

  if (const char* env = std::getenv("ARA_THREADS"); env && o.threads->count() == 0) {
    try {
      const int t = std::stoi(env);
      if (t < 1) throw std::invalid_argument("not positive");
      cfg.threads = t;
    } catch (const std::exception&) {
      std::cerr << "ara_cli: ARA_THREADS must be a positive integer, got '" << env << "'\n";
      return 2;
    }
  }
  if (o.seed->count() > 0) cfg.seed = flags.seed;
  if (o.format->count() > 0) cfg.format = flags.format;
  if (o.db->count() > 0) cfg.db = flags.db;
  if (o.out->count() > 0) cfg.out = flags.out;
  if (o.threads->count() > 0) cfg.threads = flags.threads;

  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (!cfg.out.empty()) {
    file_out.open(cfg.out, std::ios::binary);
    if (!file_out) {
      std::cerr << "ara_cli: cannot open output file '" << cfg.out << "'\n";
      return 2;
    }
    out = &file_out;
  }

  int rc = 2;
  if (name == "entropy")
    rc = ara::cmd_entropy(cfg, *out, std::cerr);
  else if (name == "tradeoff")
    rc = ara::cmd_tradeoff(cfg, *out, std::cerr);
  else if (name == "power")
    rc = ara::cmd_power(cfg, *out, std::cerr);
  else if (name == "simulate")
    rc = ara::cmd_simulate(cfg, *out, std::cerr);
  else if (name == "bounds")
    rc = ara::cmd_bounds(cfg, *out, std::cerr);
  out->flush();
  return rc;
}
