#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "infoloss/cli.hpp"
#include "infoloss/errors.hpp"

using namespace infoloss;
using namespace infoloss::cli;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
  fs::path path;
  ScratchDir() {
    std::string tmpl = (fs::temp_directory_path() / "infoloss-test-XXXXXX").string();
    path = mkdtemp(tmpl.data());
  }
  ~ScratchDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void dump(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
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

const fs::path kGoldens = fs::path(INFOLOSS_SOURCE_DIR) / "goldens";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("params are schema checked") {
  Params p(json::parse(R"({"T": 2.5, "steps": 10, "H": [[1, [0, 1]], [[0, -1], 2]], "extra": true})"), "evolve");
  CHECK(p.number("T") == 2.5);
  CHECK(p.integer("steps") == 10);
  CHECK(p.integer("record_every", 3) == 3);
  const Matrix h = p.matrix("H");
  CHECK(h(0, 1) == Complex(0, 1));
  CHECK(h(1, 0) == Complex(0, -1));
  CHECK_THROWS_AS(p.finish(), ValidationError);
  CHECK_THROWS_AS(p.integer("T"), ValidationError);
  CHECK_THROWS_AS(p.number("missing"), ValidationError);

  Params ragged(json::parse(R"({"H": [[1, 0], [0]]})"), "evolve");
  CHECK_THROWS_AS(ragged.matrix("H"), ValidationError);
  Params text(json::parse(R"({"method": 3})"), "evolve");
  CHECK_THROWS_AS(text.text("method", "exact"), ValidationError);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(parse_config(json::parse(R"({"kind": "thermo", "params": {"M": 1}})")));
  CHECK_THROWS_AS(parse_config(json::parse(R"({"params": {}})")), ValidationError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "teleport", "params": {}})")), ValidationError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "thermo", "params": {}, "colour": 1})")), ValidationError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "thermo", "params": {}, "seed": -4})")), ValidationError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"kind": "thermo", "params": {}, "seed": 1.5})")), ValidationError);
  CHECK(parse_config(json::parse(R"({"kind": "thermo", "params": {"M": 1}, "seed": 12})")).seed == 12);
  CHECK(known_kinds().size() == 9);
}

TEST_CASE("run command exit codes") {
  ScratchDir dir;
  std::ostringstream err;
  CHECK(run_command(dir.path / "absent.json", {}, err) == kExitValidation);
  CHECK(err.str().rfind("error: validation: ", 0) == 0);

  dump(dir.path / "unknown.json", R"({"kind": "thermo", "params": {"M": 1, "mass": 2}})");
  err.str("");
  CHECK(run_command(dir.path / "unknown.json", {}, err) == kExitValidation);
  CHECK(err.str().find("mass") != std::string::npos);

  dump(dir.path / "both.json", R"({"kind": "thermo", "params": {"M": 1, "beta": 2}})");
  CHECK(run_command(dir.path / "both.json", {}, err) == kExitValidation);

  // A single RK4 step far beyond its stability range.
  dump(dir.path / "blowup.json",
       R"({"kind": "evolve", "params": {"H": [[1, 0], [0, -1]], "rho0": [[0.5, 0.5], [0.5, 0.5]], "T": 100, "steps": 1, "method": "rk4"}})");
  err.str("");
  CHECK(run_command(dir.path / "blowup.json", {}, err) == kExitNumerical);
  const std::string message = err.str();
  CHECK(message.rfind("error: numerical: ", 0) == 0);
  CHECK(std::count(message.begin(), message.end(), '\n') == 1);

  dump(dir.path / "ok.json", R"({"kind": "thermo", "params": {"M": 2}})");
  CHECK(run_command(dir.path / "ok.json", {}, err) == kExitOk);
  CHECK(fs::exists(dir.path / "ok.out.csv"));
  CHECK(fs::exists(dir.path / "ok.out.json"));
  CHECK(run_command(dir.path / "ok.json", RunOptions{dir.path / "elsewhere", false}, err) == kExitOk);
  CHECK(fs::exists(dir.path / "elsewhere.json"));
}

TEST_CASE("thermo summary") {
  const auto unit = thermo_summary(1.0, false);
  CHECK(unit["entropy"].get<double>() == doctest::Approx(4 * std::numbers::pi).epsilon(1e-15));
  CHECK(unit["temperature"].get<double>() == doctest::Approx(1 / (8 * std::numbers::pi)).epsilon(1e-15));
  CHECK(unit["thermalization_time"].is_null());
  CHECK_FALSE(unit.contains("si"));
  CHECK(thermo_summary(10.0, true).contains("si"));
}

TEST_CASE("evolve outputs") {
  ScratchDir dir;
  const auto unitary = load_config(kGoldens / "configs" / "evolve_unitary.json");
  const auto out = run_experiment(unitary, dir.path / "u");
  const auto rows = csv_rows(slurp(out.csv));
  REQUIRE(rows.size() == 22);
  CHECK(rows[0][4] == "entropy");
  const double s0 = std::stod(rows[1][4]);
  for (std::size_t r = 1; r < rows.size(); ++r) CHECK(std::abs(std::stod(rows[r][4]) - s0) <= 1e-9);

  const auto summary = json::parse(slurp(out.summary));
  CHECK(summary["kind"] == "evolve");
  CHECK(summary["metrics"]["records"] == 21);
  CHECK_FALSE(summary.contains("wall_time_s"));
  CHECK(json::parse(slurp(run_experiment(unitary, dir.path / "timed", true).summary)).contains("wall_time_s"));

  const auto dephasing = load_config(kGoldens / "configs" / "evolve_dephasing.json");
  const auto d = json::parse(slurp(run_experiment(dephasing, dir.path / "d").summary));
  CHECK(d["metrics"]["final_entropy"].get<double>() > d["metrics"]["initial_entropy"].get<double>());
}

TEST_CASE("reruns are byte identical") {
  ScratchDir dir;
  for (const char* name : {"stochastic_compare", "liu_scan", "hp_run"}) {
    const auto config = load_config(kGoldens / "configs" / (std::string(name) + ".json"));
    const auto a = run_experiment(config, dir.path / "a");
    const std::string csv = slurp(a.csv), summary = slurp(a.summary);
    const auto b = run_experiment(config, dir.path / "b");
    CHECK(slurp(b.csv) == csv);
    CHECK(slurp(b.summary) == summary);
  }
}

TEST_CASE("golden comparison tolerances") {
  CHECK(numbers_match(1.0, 1.0 + 1e-10));
  CHECK_FALSE(numbers_match(1.0, 1.0 + 1e-8));
  CHECK(numbers_match(0.0, 1e-16));
  CHECK_FALSE(numbers_match(0.0, 1e-14));

  const std::string expected = "t,value\n0,1.5\n1,2.5\n";
  CHECK(compare_csv(expected, "t,value\n0,1.5000000000001\n1,2.5\n", "x.csv").empty());
  const auto bad = compare_csv(expected, "t,value\n0,1.5\n1,2.6\n", "x.csv");
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("x.csv:2:value") != std::string::npos);
  CHECK_FALSE(compare_csv(expected, "t,val\n0,1.5\n1,2.5\n", "x.csv").empty());
  CHECK_FALSE(compare_csv(expected, "t,value\n0,1.5\n", "x.csv").empty());

  const auto base = json::parse(R"({"n": 3, "ok": true, "x": 0.25, "wall_time_s": 1.0, "name": "a"})");
  CHECK(compare_json(base, json::parse(R"({"n": 3, "ok": true, "x": 0.25000000000001, "wall_time_s": 9, "name": "a"})"), "s")
            .empty());
  CHECK_FALSE(compare_json(base, json::parse(R"({"n": 4, "ok": true, "x": 0.25, "wall_time_s": 1.0, "name": "a"})"), "s").empty());
  CHECK_FALSE(compare_json(base, json::parse(R"({"n": 3, "ok": false, "x": 0.25, "wall_time_s": 1.0, "name": "a"})"), "s").empty());
  CHECK_FALSE(compare_json(base, json::parse(R"({"n": 3, "ok": true, "x": 0.25, "wall_time_s": 1.0})"), "s").empty());
}

TEST_CASE("verify") {
  std::ostringstream out, err;
  CHECK(verify_command(kGoldens, out, err) == kExitOk);
  CHECK(out.str().find("11/11 golden configs match") != std::string::npos);

  // A tampered expectation is reported with its location.
  ScratchDir dir;
  fs::copy(kGoldens, dir.path / "goldens", fs::copy_options::recursive);
  const fs::path target = dir.path / "goldens" / "expected" / "thermo_unit_mass.json";
  auto j = json::parse(slurp(target));
  j["metrics"]["entropy"] = j["metrics"]["entropy"].get<double>() * (1 + 1e-6);
  dump(target, j.dump(2) + "\n");
  std::ostringstream out2, err2;
  CHECK(verify_command(dir.path / "goldens", out2, err2) == kExitFailure);
  CHECK(out2.str().find("FAIL thermo_unit_mass") != std::string::npos);
  CHECK(err2.str().find("entropy") != std::string::npos);
  CHECK(out2.str().find("10/11 golden configs match") != std::string::npos);
}

}  // TEST_SUITE
