// Tests for configuration parsing (round-trip, defaults, diagnostics that
// name the offending field) and the command entry points driven through
// in-memory streams: output formats, exact values in the CSV cells, exit
// codes, and byte-identical reruns.
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ara/cli.hpp"
#include "ara/config.hpp"
#include "catch2/catch_amalgamated.hpp"

using namespace ara;
using Catch::Matchers::ContainsSubstring;

namespace {

// Split CSV output into rows of cells, dropping '#' comment lines. The
// numeric tables quote nothing, so a plain comma split is faithful.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.model = CorrelationModel::with_count(0.4, 0.3, 0.7, 5, 2, 6);
  c.channel = ChannelConfig{80, 0.6, pos_inf};
  c.search = ExponentSearchConfig{12, 1e-9, 1e3, 10, 0};
  c.K_grid = {0, 1, 2, 4};
  c.pd_grid = {0.0, 0.2, 0.6};
  c.N_grid = {5};
  c.pa_list = {0.5, 1.0};
  c.trials = 200;
  c.seed = 77;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("configuration survives a JSON round-trip") {
  ExperimentConfig c = tiny_config();
  c.scenario = "roundtrip";
  c.format = "json";
  c.db = true;
  c.out = "somewhere.csv";
  c.tol = 5e-4;
  c.subset_budget = 1e5;
  const nlohmann::json j = to_json(c);
  const ExperimentConfig back = config_from_json(j);
  REQUIRE(to_json(back).dump() == j.dump());

  // A finite power cap must survive as a number, infinity as the string.
  REQUIRE(j["channel"]["P_max"].is_string());
  c.channel.P_max = 0.9;
  const nlohmann::json j2 = to_json(c);
  REQUIRE(j2["channel"]["P_max"].is_number());
  REQUIRE(to_json(config_from_json(j2)).dump() == j2.dump());
}

TEST_CASE("missing fields take defaults and unknown fields are named") {
  const ExperimentConfig def = config_from_json(nlohmann::json::object());
  REQUIRE(def.model.N == 1000);
  REQUIRE(def.channel.n == 30000);
  REQUIRE(def.trials == 2000);
  REQUIRE(def.format.empty());

  REQUIRE_THROWS_WITH(config_from_json(nlohmann::json{{"bogus", 1}}),
                      ContainsSubstring("bogus"));
  REQUIRE_THROWS_WITH(
      config_from_json(nlohmann::json{{"model", {{"bogus", 1}}}}),
      ContainsSubstring("model.bogus"));
  REQUIRE_THROWS_WITH(config_from_json(nlohmann::json{{"trials", "many"}}),
                      ContainsSubstring("trials"));
  REQUIRE_THROWS_WITH(
      config_from_json(nlohmann::json{{"channel", {{"P_max", "huge"}}}}),
      ContainsSubstring("channel.P_max"));
  REQUIRE_THROWS_WITH(config_from_json(nlohmann::json{{"format", "xml"}}),
                      ContainsSubstring("format"));

  // A payload must come from somewhere: M_s or log2_Ms.
  nlohmann::json no_payload = {{"model", {{"M_s", 0}}}};
  REQUIRE_THROWS_WITH(config_from_json(no_payload), ContainsSubstring("log2_Ms"));
}

TEST_CASE("config files load with the path in any parse diagnostic") {
  const std::string path = "/tmp/ara_cli_test_config.json";
  {
    std::ofstream f(path);
    f << "{\"trials\": 7}\n";
  }
  const ExperimentConfig c = load_config(path);
  REQUIRE(c.trials == 7);
  {
    std::ofstream f(path);
    f << "{not json\n";
  }
  REQUIRE_THROWS_WITH(load_config(path), ContainsSubstring(path));
  REQUIRE_THROWS_WITH(load_config("/tmp/ara_no_such_config.json"),
                      ContainsSubstring("/tmp/ara_no_such_config.json"));
  std::remove(path.c_str());
}

TEST_CASE("CSV cells round-trip doubles exactly") {
  for (double v : {0.1, 1.0, 1e-12, 3.14159265358979, 0.0067, 123456.789}) {
    const std::string s = detail::fmt(v);
    REQUIRE(std::stod(s) == v);
  }
  REQUIRE(detail::fmt(static_cast<long long>(42)) == "42");
  REQUIRE(detail::fmt(true) == "true");
  REQUIRE(detail::fmt(false) == "false");
  REQUIRE(detail::csv_quote("plain") == "plain");
  REQUIRE(detail::csv_quote("a,b") == "\"a,b\"");
  REQUIRE(detail::csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  REQUIRE(detail::csv_quote("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("format resolution prefers the explicit choice") {
  ExperimentConfig c;
  c.format = "";
  REQUIRE(detail::resolve_format(c, false) == "csv");
  REQUIRE(detail::resolve_format(c, true) == "json");
  c.format = "csv";
  REQUIRE(detail::resolve_format(c, true) == "csv");
  c.format = "json";
  REQUIRE(detail::resolve_format(c, false) == "json");
  REQUIRE(detail::to_db(100.0) == Catch::Approx(20.0));
}

TEST_CASE("entropy table emits exact zero-detection values") {
  ExperimentConfig c = tiny_config();
  c.model.p_d = 0.0;
  c.model = CorrelationModel::with_count(c.model.p_a, c.model.p_s, 0.0, 5, 2, 8);
  std::ostringstream out, err;
  REQUIRE(cmd_entropy(c, out, err) == 0);
  REQUIRE(err.str().empty());
  const auto rows = parse_csv(out.str());
  REQUIRE(rows.size() == 1 + c.K_grid.size());
  REQUIRE(rows[0] == std::vector<std::string>{"K", "S", "H_K"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const long long K = std::stoll(rows[i][0]);
    REQUIRE(K == c.K_grid[i - 1]);
    // Without detection every received message is a full payload.
    const double S_want =
        static_cast<double>(K) * c.model.log2_Ms / static_cast<double>(c.channel.n);
    REQUIRE(std::stod(rows[i][1]) == S_want);
    REQUIRE(std::stod(rows[i][2]) == (K >= 1 ? c.model.log2_Ms : 0.0));
  }
  // The first line carries the fully-resolved configuration so a result
  // file alone is enough to rerun it.
  REQUIRE(out.str().rfind("# config=", 0) == 0);

  ExperimentConfig empty = c;
  empty.K_grid.clear();
  std::ostringstream out2, err2;
  REQUIRE(cmd_entropy(empty, out2, err2) == 0);
  REQUIRE(parse_csv(out2.str()).size() == 1);  // header only
}

TEST_CASE("entropy JSON mirrors the CSV rows") {
  ExperimentConfig c = tiny_config();
  c.format = "json";
  std::ostringstream out, err;
  REQUIRE(cmd_entropy(c, out, err) == 0);
  const nlohmann::json doc = nlohmann::json::parse(out.str());
  REQUIRE(doc.contains("config"));
  REQUIRE(doc["rows"].size() == c.K_grid.size());
  for (std::size_t i = 0; i < c.K_grid.size(); ++i)
    REQUIRE(doc["rows"][i]["K"].get<long long>() == c.K_grid[i]);
  ExperimentConfig csv_c = c;
  csv_c.format = "";
  std::ostringstream out_csv, err_csv;
  REQUIRE(cmd_entropy(csv_c, out_csv, err_csv) == 0);
  const auto rows = parse_csv(out_csv.str());
  for (std::size_t i = 0; i < c.K_grid.size(); ++i) {
    REQUIRE(std::stod(rows[i + 1][1]) == doc["rows"][i]["S"].get<double>());
    REQUIRE(std::stod(rows[i + 1][2]) == doc["rows"][i]["H_K"].get<double>());
  }
}

TEST_CASE("simulation report is byte-identical across reruns and thread counts") {
  ExperimentConfig c = tiny_config();
  std::ostringstream a, b, errs;
  REQUIRE(cmd_simulate(c, a, errs) == 0);
  REQUIRE(cmd_simulate(c, b, errs) == 0);
  REQUIRE(a.str() == b.str());
  ExperimentConfig c2 = c;
  c2.threads = 3;
  std::ostringstream d;
  REQUIRE(cmd_simulate(c2, d, errs) == 0);
  // Only the echoed thread count may differ between the two reports.
  const nlohmann::json ja = nlohmann::json::parse(a.str());
  const nlohmann::json jd = nlohmann::json::parse(d.str());
  REQUIRE(ja["tally"].dump() == jd["tally"].dump());
  REQUIRE(ja["rates"].dump() == jd["rates"].dump());
  REQUIRE(ja["checks"].dump() == jd["checks"].dump());
  REQUIRE(ja["all_pass"] == jd["all_pass"]);
  REQUIRE(ja["all_pass"].get<bool>());
  REQUIRE(ja["checks"].size() == 4);
  REQUIRE(ja["tally"]["trials"].get<long long>() == c.trials);
}

TEST_CASE("an empty simulation reports nothing and succeeds") {
  ExperimentConfig c = tiny_config();
  c.trials = 0;
  std::ostringstream out, err;
  REQUIRE(cmd_simulate(c, out, err) == 0);
  const nlohmann::json doc = nlohmann::json::parse(out.str());
  REQUIRE(doc["checks"].empty());
  REQUIRE(doc["all_pass"].get<bool>());
  REQUIRE(doc["tally"]["trials"].get<long long>() == 0);
}

TEST_CASE("simulation CSV carries verdicts and the estimator-quality row") {
  ExperimentConfig c = tiny_config();
  c.format = "csv";
  std::ostringstream out, err;
  REQUIRE(cmd_simulate(c, out, err) == 0);
  const auto rows = parse_csv(out.str());
  REQUIRE(rows.size() == 6);  // header + four checks + info row
  REQUIRE(rows[0][0] == "metric");
  const std::vector<std::string> names = {"eps_a", "eps_s", "eps_sa", "eps_fp"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    REQUIRE(rows[i + 1][0] == names[i]);
    REQUIRE(rows[i + 1][5] == "PASS");
  }
  REQUIRE(rows[5][0] == "ka_misestimate");
  REQUIRE(rows[5][5] == "INFO");
}

TEST_CASE("bound tables expose aggregates and per-cell terms") {
  ExperimentConfig c = tiny_config();
  c.format = "json";
  std::ostringstream out, err;
  REQUIRE(cmd_bounds(c, out, err) == 0);
  const nlohmann::json doc = nlohmann::json::parse(out.str());
  for (const char* k : {"eps_a", "eps_s", "eps_sa", "eps_fp"}) {
    const double v = doc["aggregates"][k].get<double>();
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }
  REQUIRE(doc["terms"].size() > 0);
  for (const auto& t : doc["terms"]) {
    REQUIRE(t["K"].get<long long>() >= t["Ka"].get<long long>());
    for (const char* k : {"a", "b", "c", "d", "e"}) {
      const double v = t[k].get<double>();
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }

  ExperimentConfig csv_c = tiny_config();
  csv_c.format = "csv";
  std::ostringstream out2, err2;
  REQUIRE(cmd_bounds(csv_c, out2, err2) == 0);
  REQUIRE(out2.str().find("# aggregates=") != std::string::npos);
  const auto rows = parse_csv(out2.str());
  REQUIRE(rows[0] == std::vector<std::string>{"K", "Ka", "a", "b", "c", "d", "e"});
  REQUIRE(rows.size() == 1 + doc["terms"].size());
}

TEST_CASE("command errors land on the error stream with a nonzero exit") {
  ExperimentConfig c = tiny_config();
  c.model.p_a = 2.0;  // invalid on purpose
  std::ostringstream out, err;
  REQUIRE(cmd_entropy(c, out, err) == 1);
  REQUIRE_THAT(err.str(), ContainsSubstring("entropy:"));
  std::ostringstream out2, err2;
  REQUIRE(cmd_simulate(c, out2, err2) == 1);
  REQUIRE_THAT(err2.str(), ContainsSubstring("simulate:"));
}
