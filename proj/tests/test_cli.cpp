#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "b92/cli.hpp"
#include "b92/errors.hpp"
#include "test_support.hpp"

using namespace b92;
using namespace b92::cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "b92sim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

KeyValues parse(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

}  // namespace

TEST_CASE("parse_key_values") {
  const auto kv = parse("# comment\n  phi_deg = 45  # trailing\n\nfiber_km=30\nphi_deg = 60\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("phi_deg") == "60");
  CHECK(kv.at("fiber_km") == "30");
  CHECK_THROWS_WITH_AS(parse("fiber_km 30\n"), doctest::Contains("line 1"), ConfigError);
  CHECK_THROWS_AS(parse(" = 3\n"), ConfigError);
}

TEST_CASE("build_spec validation") {
  CHECK_THROWS_WITH_AS(build_spec(parse("fibre_km = 3\n")), doctest::Contains("fibre_km"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(build_spec(parse("fiber_km = abc\n")), doctest::Contains("fiber_km"),
                       ConfigError);
  CHECK_THROWS_AS(build_spec(parse("format = xml\n")), ConfigError);
  CHECK_THROWS_AS(build_spec(parse("sweep_param = group_index\nsweep_values = 1\n")), ConfigError);
  CHECK_THROWS_AS(build_spec(parse("phi_deg = 120\n")), ConfigError);
  CHECK_THROWS_AS(build_spec(parse("repetitions = 0\n")), ConfigError);

  const auto spec = build_spec(parse("phi_deg = 45\nattack = two_point\nfiber_km = 35\n"));
  const auto& a = std::get<TwoPointAttack>(spec.session.attack);
  CHECK(a.eve2_pos_km == 35.0);
  CHECK(spec.session.geometry_phi == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
}

TEST_CASE("simulate: honest ideal lossless") {
  const auto r = invoke({"simulate", "--n_slots", "100000", "--phi_deg", "45"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"n_slots", "clicks", "conclusive", "conclusive_rate",
                                            "qber", "attack", "seed"});
  CHECK(std::abs(std::stod(rows[1][3]) - 0.25) <= 0.01);
  CHECK(rows[1][4] == "0");
  CHECK(rows[1][5] == "none");
}

TEST_CASE("simulate: config errors name the field") {
  const auto r = invoke({"simulate", "--attack", "two_point", "--fiber_km", "40", "--eve1_km", "30",
                         "--eve2_km", "10"});
  CHECK(r.code != 0);
  CHECK(r.err.find("position ordering") != std::string::npos);
  CHECK(r.out.empty());

  const auto unknown = invoke({"simulate", "--bogus", "1"});
  CHECK(unknown.code != 0);
  CHECK(unknown.err.find("bogus") != std::string::npos);

  CHECK(invoke({"simulate", "--format", "xml"}).code != 0);
  CHECK(invoke({}).code != 0);
}

TEST_CASE("simulate: json output and repetitions") {
  const auto r = invoke({"simulate", "--n_slots", "1000", "--format", "json", "--repetitions", "3",
                         "--seed", "10"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 3);
  CHECK(j[2]["seed"] == 12);
  for (const char* key : {"n_slots", "clicks", "conclusive", "conclusive_rate", "qber", "attack"}) {
    CHECK(j[0].contains(key));
  }
  const auto single = invoke({"simulate", "--n_slots", "1000", "--format=json"});
  CHECK(nlohmann::json::parse(single.out).is_object());
}

TEST_CASE("commands are byte-identical across runs") {
  const std::vector<std::vector<std::string>> commands = {
      {"simulate", "--n_slots", "20000", "--source", "coherent", "--bob_dark", "0.01"},
      {"simulate", "--format", "json", "--attack", "naive", "--n_slots", "20000"},
      {"sweep", "--sweep_param", "phi_deg", "--sweep_values", "30,45", "--repetitions", "2",
       "--n_slots", "5000"},
      {"feasibility", "--attack", "two_point", "--fiber_km", "35"},
  };
  for (const auto& cmd : commands) {
    const auto a = invoke(cmd);
    const auto b = invoke(cmd);
    CAPTURE(cmd.front());
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
}

TEST_CASE("sweep: header, ordering and seeds") {
  const auto r = invoke({"sweep", "--sweep_param", "fiber_km", "--sweep_values", "0, 10",
                         "--repetitions", "2", "--n_slots", "1000", "--seed", "40"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 5);
  std::ostringstream header;
  header << kSweepCsvHeader;
  CHECK(r.out.substr(0, r.out.find('\n')) == header.str());
  CHECK(rows[1][1] == "0");
  CHECK(rows[1][2] == "0");
  CHECK(rows[1][3] == "40");
  CHECK(rows[2][2] == "1");
  CHECK(rows[2][3] == "41");
  CHECK(rows[3][1] == "10");
  CHECK(rows[4][3] == "41");

  const auto empty = invoke({"sweep", "--sweep_param", "fiber_km", "--sweep_values", ""});
  CHECK(empty.code == 0);
  CHECK(empty.out == std::string(kSweepCsvHeader) + "\n");

  const auto empty_json =
      invoke({"sweep", "--sweep_param", "fiber_km", "--sweep_values", "", "--format", "json"});
  CHECK(nlohmann::json::parse(empty_json.out).empty());

  CHECK(invoke({"sweep", "--sweep_param", "colour", "--sweep_values", "1"}).code != 0);
  CHECK(invoke({"sweep"}).code != 0);
}

TEST_CASE("sweep: fiber length against a throttled two-point attack") {
  const auto r = invoke({"sweep", "--attack", "two_point", "--sweep_param", "fiber_km",
                         "--sweep_values", "20,25,30.103,35", "--repetitions", "40",
                         "--n_slots", "100000", "--seed", "300"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 1 + 4 * 40);
  std::map<std::string, int> rejected, total;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ++total[rows[i][1]];
    if (rows[i][9] == "true") ++rejected[rows[i][1]];
    CHECK(rows[i][8] == "0");
  }
  CHECK(rejected["20"] == 40);
  CHECK(rejected["25"] == 40);
  // At least 95% of repetitions pass at or beyond the threshold.
  CHECK(total["30.103"] - rejected["30.103"] >= 38);
  CHECK(total["35"] - rejected["35"] >= 38);
}

TEST_CASE("sweep: phi tracks half sin^2") {
  const auto r = invoke({"sweep", "--sweep_param", "phi_deg", "--sweep_values", "30,45,60",
                         "--n_slots", "100000"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double phi = std::stod(rows[i][1]) * std::numbers::pi / 180.0;
    const double expected = 0.5 * std::pow(std::sin(phi), 2);
    CHECK(b92::testing::within_sigmas(std::stod(rows[i][7]), expected, 100000));
  }
}

TEST_CASE("feasibility command") {
  const auto at35 = invoke({"feasibility", "--attack", "two_point", "--fiber_km", "35",
                             "--format", "json"});
  REQUIRE(at35.code == 0);
  const auto j = nlohmann::json::parse(at35.out);
  CHECK(j["min_separation_km"].get<double>() == doctest::Approx(30.10).epsilon(1e-3));
  CHECK(j["required_db"].get<double>() == doctest::Approx(6.02).epsilon(1e-3));
  CHECK(j["feasible"] == true);
  for (const char* key : {"p_succ", "configured_separation_km", "throttle_keep", "timing_slack_s",
                          "notes"}) {
    CHECK(j.contains(key));
  }

  const auto optimal = invoke({"feasibility", "--attack", "two_point", "--fiber_km", "35",
                               "--strategy", "optimal", "--format", "json"});
  CHECK(nlohmann::json::parse(optimal.out)["min_separation_km"].get<double>() ==
        doctest::Approx(26.69).epsilon(1e-3));

  const auto zero = invoke({"feasibility", "--attack", "two_point", "--fiber_km", "10",
                            "--eve1_km", "5", "--eve2_km", "5"});
  REQUIRE(zero.code == 0);
  const auto rows = parse_csv(zero.out);
  CHECK(rows[0][4] == "feasible");
  CHECK(rows[1][4] == "false");
  CHECK(rows[1][5].empty());

  const auto honest = invoke({"feasibility"});
  CHECK(honest.code != 0);
  CHECK(honest.err.find("two_point") != std::string::npos);
}

TEST_CASE("config file, overrides and --out") {
  const auto dir = std::filesystem::temp_directory_path() / "b92sim_cli_test";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "run.cfg";
  const auto out = dir / "out.csv";
  {
    std::ofstream f(cfg);
    f << "n_slots = 2000\nseed = 5\nfiber_km = 10\n";
  }
  const auto r = invoke({"simulate", "--config", cfg.string(), "--seed", "9", "--out",
                         out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(out);
  const std::string written((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto rows = parse_csv(written);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "2000");
  CHECK(rows[1][6] == "9");

  CHECK(invoke({"simulate", "--config", (dir / "missing.cfg").string()}).code != 0);
  std::filesystem::remove_all(dir);
}
