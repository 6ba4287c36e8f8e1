#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "lattice_kpp/cli.hpp"
#include "lattice_kpp/errors.hpp"

namespace fs = std::filesystem;
using namespace lkpp;
using namespace lkpp::cli;

namespace {

const char* kReference = R"({"alpha": 1, "beta": 0.5, "gamma": 0.1, "eta": 0.2, "tau": 0,
  "birth": {"kind": "monod", "p": 1, "q": 1}})";

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("lattice_kpp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::getline(in, line);  // provenance
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

struct Result {
  int code;
  std::string err;
};

Result exec(const std::string& command, const std::string& config, const fs::path& out) {
  std::ostringstream o, e;
  const int code = execute(command, config, out.string(), true, o, e);
  return {code, e.str()};
}

}  // namespace

TEST_CASE("minimal config takes documented defaults") {
  const RunConfig c = parse_config(kReference);
  CHECK(c.model.alpha == 1.0);
  CHECK(c.model.eta == 0.2);
  CHECK(c.birth.slope_at_zero() == 1.0);
  CHECK(c.simulate.window_half_width == 400);
  CHECK(c.simulate.horizon == 200.0);
  CHECK(c.simulate.theta == 0.5);
  CHECK(c.simulate.scheme == sim::Scheme::rk4);
  CHECK(c.kernel_verify.times == std::vector<double>{0.1, 1.0, 5.0});
  CHECK(c.output.dir == "out");

  // the effective config parses back to the same hash
  CHECK(config_hash(parse_config(to_json(c))) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  RunConfig other = c;
  other.output.dir = "elsewhere";
  CHECK(config_hash(other) == config_hash(c));
  other.model.beta = 0.4;
  CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("config errors") {
  const std::string typo = R"({"alpha": 1, "betta": 0.5, "gamma": 0.1, "eta": 0.2})";
  try {
    parse_config(typo);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("betta") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"alpha": "one"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"alpha": 1,)"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"birth": {"kind": "monod", "r": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"alpha": -1, "beta": 0.5, "gamma": 0.1, "eta": 0.2})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"simulate": {"theta": 1.5}})"), std::invalid_argument);

  TempDir dir;
  const Result r = exec("speed", dir.write("typo.json", typo), dir.path / "out");
  CHECK(r.code == kParseError);
  CHECK(r.err.find("betta") != std::string::npos);
  CHECK(exec("speed", (dir.path / "missing.json").string(), dir.path / "out").code == kParseError);
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1.2581070682748194, 1e-300, -2.5e17, 0.0}) {
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(INFINITY) == "inf");
}

TEST_CASE("speed command writes the reference speed") {
  TempDir dir;
  const std::string cfg = dir.write("c.json", kReference);
  REQUIRE(exec("speed", cfg, dir.path / "a").code == kSuccess);
  const std::string text = slurp(dir.path / "a" / "speed.csv");
  const RunConfig c = parse_config(kReference);
  CHECK(text.rfind("# lattice-kpp 1.0.0 config=" + config_hash(c) + " command=speed\n", 0) == 0);
  const auto rows = read_csv(dir.path / "a" / "speed.csv");
  REQUIRE(rows.size() == 1);
  CHECK(std::stod(rows[0][1]) == doctest::Approx(1.2581070682748194).epsilon(1e-8));
  CHECK(fs::exists(dir.path / "a" / "config.effective.json"));

  // rerunning gives byte-identical output
  REQUIRE(exec("speed", cfg, dir.path / "b").code == kSuccess);
  CHECK(slurp(dir.path / "b" / "speed.csv") == text);
}

TEST_CASE("crowded beta is a regime error for speed but a flagged row in sweeps") {
  TempDir dir;
  const std::string cfg = dir.write(
      "c.json", R"({"alpha": 1, "beta": 5, "gamma": 0.1, "eta": 0.2,
      "birth": {"kind": "monod", "p": 1, "q": 1},
      "sweep": {"parameter": "beta", "values": [0.5, 5.0]}})");
  const Result r = exec("speed", cfg, dir.path / "s");
  CHECK(r.code == kRegimeError);
  CHECK(r.err.find("4.95") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "s" / "speed.csv"));

  REQUIRE(exec("sweep", cfg, dir.path / "w").code == kSuccess);
  const auto rows = read_csv(dir.path / "w" / "sweep.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][3] == "KPP_OK");
  CHECK(rows[1][3] == "BETA_OUT_OF_RANGE");
  CHECK(rows[1][1] == "nan");
}

TEST_CASE("optimal beta matches the speed at beta1") {
  TempDir dir;
  REQUIRE(exec("optimal-beta", dir.write("c.json", kReference), dir.path / "o").code == kSuccess);
  const auto rows = read_csv(dir.path / "o" / "optimal.csv");
  REQUIRE(rows.size() == 1);
  const double beta1 = std::stod(rows[0][0]);
  const double c_max = std::stod(rows[0][4]);
  const double c_at = std::stod(rows[0][6]);
  CHECK(beta1 == doctest::Approx(0.8531342341005513).epsilon(1e-9));
  CHECK(std::abs(c_at - c_max) <= 1e-6);

  // the same number through the speed command
  const std::string at = R"({"alpha": 1, "beta": )" + format_number(beta1) +
                         R"(, "gamma": 0.1, "eta": 0.2, "birth": {"kind": "monod", "p": 1, "q": 1}})";
  REQUIRE(exec("speed", dir.write("at.json", at), dir.path / "s").code == kSuccess);
  CHECK(std::abs(std::stod(read_csv(dir.path / "s" / "speed.csv")[0][1]) - c_max) <= 1e-6);
}

TEST_CASE("eta sweep is strictly decreasing and reproducible") {
  TempDir dir;
  const std::string cfg = dir.write(
      "c.json", R"({"alpha": 1, "beta": 0.5, "gamma": 0.1, "eta": 0.2,
      "birth": {"kind": "monod", "p": 1, "q": 1},
      "sweep": {"parameter": "eta", "range": {"from": 0.5, "to": 17.9, "count": 20}, "threads": 3}})");
  REQUIRE(exec("sweep", cfg, dir.path / "a").code == kSuccess);
  const auto rows = read_csv(dir.path / "a" / "sweep.csv");
  REQUIRE(rows.size() == 20);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(std::stod(rows[k][1]) < std::stod(rows[k - 1][1]));
  }
  CHECK(fs::exists(dir.path / "a" / "sweep.gp"));

  // thread count does not change a byte
  const std::string serial = dir.write(
      "s.json", R"({"alpha": 1, "beta": 0.5, "gamma": 0.1, "eta": 0.2,
      "birth": {"kind": "monod", "p": 1, "q": 1},
      "sweep": {"parameter": "eta", "range": {"from": 0.5, "to": 17.9, "count": 20}, "threads": 1}})");
  REQUIRE(exec("sweep", serial, dir.path / "b").code == kSuccess);
  const std::string a = slurp(dir.path / "a" / "sweep.csv");
  const std::string b = slurp(dir.path / "b" / "sweep.csv");
  CHECK(a.substr(a.find('\n')) == b.substr(b.find('\n')));
}

TEST_CASE("kernel-verify reports every check") {
  TempDir dir;
  const std::string cfg = dir.write(
      "c.json", R"({"alpha": 1, "beta": 0.5, "gamma": 0.1, "eta": 0.2,
      "birth": {"kind": "monod", "p": 1, "q": 1},
      "kernel_verify": {"times": [0.5, 2], "half_width": 6}})");
  REQUIRE(exec("kernel-verify", cfg, dir.path / "k").code == kSuccess);
  const auto rows = read_csv(dir.path / "k" / "kernel_report.csv");
  CHECK(rows.size() >= 20);
  for (const auto& row : rows) CHECK(row.back() != "FAIL");
}

TEST_CASE("simulate refuses a window the front would reach") {
  TempDir dir;
  const std::string cfg = dir.write(
      "c.json", R"({"alpha": 1, "beta": 0.5, "gamma": 0.1, "eta": 0.2,
      "birth": {"kind": "monod", "p": 1, "q": 1},
      "simulate": {"window_half_width": 60, "horizon": 80}})");
  CHECK(exec("simulate", cfg, dir.path / "x").code == kContamination);
}

TEST_CASE("short simulation writes every artifact") {
  TempDir dir;
  const std::string cfg = dir.write(
      "c.json", R"({"alpha": 1, "beta": 0.5, "gamma": 0.1, "eta": 0.2,
      "birth": {"kind": "monod", "p": 1, "q": 1},
      "simulate": {"window_half_width": 150, "horizon": 60}})");
  REQUIRE(exec("simulate", cfg, dir.path / "s").code == kSuccess);
  for (const char* name : {"trajectory.csv", "front.csv", "profile.csv", "comparison.csv"}) {
    CHECK(fs::exists(dir.path / "s" / name));
  }
  const auto rows = read_csv(dir.path / "s" / "comparison.csv");
  double rel = INFINITY;
  for (const auto& row : rows) {
    if (row[0] == "relative_error") rel = std::abs(std::stod(row[1]));  // signed
  }
  CHECK(rel <= 0.10);
}

TEST_CASE("unknown command") {
  TempDir dir;
  CHECK(exec("plot", dir.write("c.json", kReference), dir.path / "u").code == kParseError);
}
