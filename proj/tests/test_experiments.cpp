#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rds/error.hpp"
#include "rds/experiments.hpp"

using namespace rds;

namespace {

std::string error_of(const std::string& text, std::optional<Subcommand> sub = std::nullopt) {
  try {
    parse_config(text, sub).validate();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

// Sign of sum_k s_k v_k^-sigma never changes on a dense grid of [lo, hi].
bool dense_zero_free(const std::vector<double>& v, const std::vector<int>& s, double lo, double hi) {
  int first = 0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = lo + (hi - lo) * i / 20000.0;
    long double f = 0.0L;
    for (std::size_t k = 0; k < v.size(); ++k) f += s[k] * std::pow(static_cast<long double>(v[k]), -x);
    const int sg = (f > 0) - (f < 0);
    if (sg == 0) return false;
    if (first == 0) first = sg;
    if (sg != first) return false;
  }
  return true;
}

ExperimentConfig config(const std::string& text) {
  auto c = parse_config(text);
  c.validate();
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("rds-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config errors name the offending key") {
  CHECK(error_of("subcommand = clt\ntrials = abc\n").find("'trials'") != std::string::npos);
  CHECK(error_of("subcommand = clt\nbogus = 1\n").find("'bogus'") != std::string::npos);
  CHECK(error_of("subcommand = clt\nexhaustive = true\n").find("'exhaustive'") != std::string::npos);
  CHECK(error_of("subcommand = clt\ntrials = 3\ntrials = 4\n").find("'trials'") != std::string::npos);
  CHECK(error_of("trials = 3\n").find("'subcommand'") != std::string::npos);
  CHECK(error_of("subcommand = no-zeros\nseq = naturals\nsigma-lo = 0.4\n").find("'sigma-lo'") != std::string::npos);
  CHECK(error_of("subcommand = clt\ntrials = 0\n").find("'trials'") != std::string::npos);
  CHECK(error_of("subcommand = scan\neta = 1.5\n").find("'eta'") != std::string::npos);
  CHECK(error_of("subcommand = sign-changes\nsigmas = 0.6, 0.7\n").find("'sigmas'") != std::string::npos);
  CHECK(error_of("subcommand = clt\n", Subcommand::Scan).find("'subcommand'") != std::string::npos);
  CHECK(error_of("no equals sign\n", Subcommand::Clt).find("line 1") != std::string::npos);
  CHECK(error_of("# comment\nsubcommand = clt\ntrials = 5  # trailing\n").empty());
}

TEST_CASE("canonical form and hash") {
  const auto a = config("subcommand = clt\ntrials = 5\nworkers = 1\n");
  const auto b = config("workers = 4\ntrials = 5\nsubcommand = clt\nout = /tmp/x\nsvg = true\n");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  CHECK(a.canonical().find("workers") == std::string::npos);
  CHECK(config("subcommand = clt\ntrials = 6\n").hash() != a.hash());

  const auto round = parse_config(a.canonical());
  CHECK(round.canonical() == a.canonical());

  std::istringstream lines(a.canonical());
  std::string line, prev;
  while (std::getline(lines, line)) {
    CHECK(prev < line);
    prev = line;
  }
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(is_execution_key("workers"));
  CHECK(!is_execution_key("seed"));
}

TEST_CASE("every subcommand has defaults that validate") {
  for (const auto s : all_subcommands()) {
    if (s == Subcommand::Report) continue;
    CHECK_NOTHROW(make_config(s).validate());
    CHECK(parse_subcommand(to_string(s)) == s);
    CHECK(!config_keys(s).empty());
  }
}

TEST_CASE("exhaustive no-zero experiment on two frequencies") {
  const auto c = config("subcommand = no-zeros\nseq = explicit\nseq-values = 2, 3\nsigma-lo = 0.1\nexhaustive = true\n");
  const auto r = run_experiment(c);
  CHECK(r.payload["certified"]["trials"] == 4);
  CHECK(r.payload["certified"]["fraction"] == 1.0);
  const auto& rows = r.tables.at(0).rows;
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const std::vector<int> s{(i & 1) ? -1 : 1, (i & 2) ? -1 : 1};
    CHECK(dense_zero_free({2.0, 3.0}, s, 0.1, 60.0));
    CHECK(rows[i][1] == "1");
  }
}

TEST_CASE("exhaustive certification agrees with the dense oracle") {
  const auto c =
      config("subcommand = no-zeros\nseq = explicit\nseq-values = 2, 3, 4\nsigma-lo = 0.1\nexhaustive = true\n");
  const auto r = run_experiment(c);
  const auto& rows = r.tables.at(0).rows;
  REQUIRE(rows.size() == 8);
  int agree = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    const std::vector<int> s{(i & 1) ? -1 : 1, (i & 2) ? -1 : 1, (i & 4) ? -1 : 1};
    const bool free = dense_zero_free({2.0, 3.0, 4.0}, s, 0.1, 60.0);
    const bool certified = rows[i][1] == "1";
    if (certified) CHECK(free);
    agree += certified == free;
  }
  CHECK(agree == 8);
}

TEST_CASE("conditioning on every sign forced positive") {
  const auto c = config(
      "subcommand = no-zeros\nseq = explicit\nseq-values = 2, 3, 5\nsigma-lo = 0.3\ntrials = 10\ncondition-cutoff = 5\n");
  const auto r = run_experiment(c);
  const auto& arm = r.payload["conditioning"];
  CHECK(arm["fraction"] == 1.0);
  CHECK(arm["pi_u"] == 3);
  CHECK(arm["probability"] == 0.125);
  CHECK(arm["consistent"] == true);
}

TEST_CASE("no-zero experiment warns in the divergent regime") {
  const auto c = config("subcommand = no-zeros\nseq = naturals\nsigma-lo = 0.9\ntrials = 3\ncutoff = 1000\n");
  const auto r = run_experiment(c);
  CHECK(r.payload["warnings"].size() == 1);
}

TEST_CASE("B_U event with an empty tail") {
  const auto c = config("subcommand = bu-event\nseq = explicit\nseq-values = 2, 3\nu-ladder = 10\ntrials = 20\n");
  const auto r = run_experiment(c);
  const auto& row = r.payload["ladder"][0];
  CHECK(row["terms"] == 0);
  CHECK(row["count"] == 0);
  CHECK(row["bound_holds"] == true);
  CHECK(r.checks_passed);
}

TEST_CASE("B_U formula matches 6 exp(-level^2 / (18 T_U))") {
  const auto c = config("subcommand = bu-event\nu-ladder = 100, 1000\ntrials = 50\n");
  const auto r = run_experiment(c);
  for (const auto& row : r.payload["ladder"]) {
    const double t = row["tail_reciprocal_sum"]["upper"];
    CHECK(row["formula"].get<double>() == doctest::Approx(6.0 * std::exp(-0.01 / (18.0 * t))));
  }
}

TEST_CASE("exceedance flags the degenerate level") {
  const auto c = config("subcommand = exceedance\nscales = 100, 1000\nlevels = 0, 1\ntrials = 50\n");
  const auto r = run_experiment(c);
  CHECK(r.payload["levels"][0]["degenerate"] == true);
  CHECK(r.payload["levels"][1]["degenerate"] == false);
  CHECK(r.payload["monotone_in_m"] == true);
}

TEST_CASE("inequalities hold and oversize instances are refused") {
  const auto r = run_experiment(config("subcommand = inequalities\nn = 10\ninstances = 20\n"));
  CHECK(r.payload["all_hold"] == true);
  CHECK(r.payload["checks"] == 400);
  CHECK_THROWS_AS(run_experiment(config("subcommand = inequalities\nn = 30\n")), ResourceError);
}

TEST_CASE("reports are reproducible across worker counts") {
  const std::vector<std::string> texts{
      "subcommand = no-zeros\nseq = weighted-naturals\ntrials = 12\ncutoff = 1e4\n",
      "subcommand = clt\ntrials = 40\ncutoff = 1e4\n",
      "subcommand = inequalities\nn = 8\ninstances = 10\n",
      "subcommand = exceedance\nscales = 100, 1000\ntrials = 30\n",
  };
  for (const auto& text : texts) {
    auto c = config(text);
    c.workers = 1;
    const auto a = run_experiment(c);
    c.workers = 4;
    const auto b = run_experiment(c);
    CHECK(a.payload_bytes() == b.payload_bytes());
    CHECK(a.config_hash == b.config_hash);
  }
}

TEST_CASE("written reports round-trip through the report subcommand") {
  const auto dir = temp_dir("roundtrip");
  auto c = config("subcommand = clt\ntrials = 20\ncutoff = 1000\nsvg = true\n");
  const auto r = run_experiment(c);
  const auto files = write_report(r, dir.string());
  CHECK(files.size() == 3);
  const auto json_path = dir / ("clt-" + r.config_hash + ".json");
  REQUIRE(std::filesystem::exists(json_path));

  auto rc = make_config(Subcommand::Report);
  rc.input = json_path.string();
  const auto back = run_experiment(rc);
  CHECK(back.checks_passed);
  CHECK(back.payload["config_hash_verified"] == true);
  CHECK(back.payload["source_config_hash"] == r.config_hash);

  auto doc = nlohmann::ordered_json::parse(std::ifstream(json_path));
  doc["config"] = doc["config"].get<std::string>() + "trials = 21\n";
  std::ofstream(json_path) << doc.dump(2);
  CHECK(!run_experiment(rc).checks_passed);

  rc.input = (dir / "missing.json").string();
  CHECK_THROWS_AS(run_experiment(rc), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv, svg and plan rendering") {
  const Table t{"x", {"a", "b,c"}, {{"1", "say \"hi\""}}};
  CHECK(to_csv(t) == "a,\"b,c\"\n1,\"say \"\"hi\"\"\"\n");
  const auto svg = svg_line_chart("t", "x", "y", {{"s", {1.0, 2.0}, {3.0, 4.0}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  const auto plan = describe_plan(make_config(Subcommand::NoZeros));
  CHECK(plan.find("no-zeros") != std::string::npos);
}
