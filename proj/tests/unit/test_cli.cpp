#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "critmag/errors.hpp"
#include "critmag_cli/commands.hpp"
#include "critmag_cli/config.hpp"
#include "critmag_cli/run.hpp"
#include "doctest.h"

using namespace critmag;
using namespace critmag::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("critmag_test_cli_" + std::to_string(getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "critmag");
  args.push_back("--quiet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out);
}

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError("");
}

const char* kSmallBox =
    "scan.mu_min = 0.1\nscan.mu_max = 1\nscan.mu_count = 3\n"
    "scan.t_min = -1\nscan.t_max = 1\nscan.t_count = 3\n";

}  // namespace

TEST_CASE("every key is documented and the defaults round-trip") {
  const auto keys = documented_keys();
  CHECK(keys.size() == 43);
  for (const auto& k : keys) CHECK_FALSE(k.doc.empty());
  CHECK(keys.front().key == "dimension");
  CHECK(parse_config(echo(RunConfig{})) == RunConfig{});
  CHECK(parse_config("") == RunConfig{});
}

TEST_CASE("config round trip of non-default values") {
  RunConfig c;
  c.dimension = 6;
  c.alpha = 1.25;
  c.epsilon = {0.1, 1.0 / 3.0, 1e-7};
  c.eps_max = 0.5;
  c.seed = 18446744073709551615ULL;
  c.output = "runs/a b";
  c.k_max = 6;
  c.quadrature_mode = "qmc";
  c.quadrature_rel_tol = 3.3e-9;
  c.a_amplitude = {0.1, -0.2, 0.3, 0, 0, 1e300};
  c.v_family = "sign-changing-gaussian";
  c.v_amplitude = -0.7;
  c.scan_direction1 = {1, 0, 0, 0, 0, 0};
  c.scan_direction2 = {0, 1, 0, 0, 0, 0};
  c.asymptotics_xi = {{0, 0, 0, 0, 0, 0}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};
  const std::string text = echo(c);
  const RunConfig back = parse_config(text);
  CHECK(back == c);
  CHECK(echo(back) == text);
  CHECK_NOTHROW(validate(back));
}

TEST_CASE("strict parsing reports line and column") {
  {
    const ConfigError e = parse_error("dimension = 5\n  bogus.key = 1\n");
    CHECK(e.line == 2);
    CHECK(e.column == 3);
  }
  {
    const ConfigError e = parse_error("alpha = 2\nalpha = 1.5\n");
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }
  {
    const ConfigError e = parse_error("# header\n\nscan.mu_count =  twelve\n");
    CHECK(e.line == 3);
    CHECK(e.column == 18);
  }
  {
    const ConfigError e = parse_error("epsilon = 0.1, x\n");
    CHECK(e.line == 1);
    CHECK(e.column == 11);
  }
  CHECK(parse_error("dimension 5\n").line == 1);
  CHECK(parse_error("seed = -1\n").line == 1);
  CHECK(parse_error("alpha = 2.0extra\n").line == 1);
  // Comments after whitespace are stripped; '#' inside a token is kept.
  CHECK(parse_config("output = run#1   # trailing\n").output == "run#1");
}

TEST_CASE("cross-field validation") {
  RunConfig c;
  c.a_center = {1, 2, 3};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = RunConfig{};
  c.epsilon = {0.2};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = RunConfig{};
  c.dimension = 4;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = RunConfig{};
  c.scan_mu_min = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = RunConfig{};
  c.quadrature_mode = "monte-carlo";
  CHECK_THROWS_AS(validate(c), ConfigError);
  CHECK_NOTHROW(validate(RunConfig{}));
}

TEST_CASE("table loader") {
  const fs::path dir = scratch("table");
  spit(dir / "v.txt", "# x1 x2 x3 x4 x5 V\n0 0 0 0 0 1.5\n1 0 0 0 0 0.5  # edge\n\n0 1 0 0 0 -2\n");
  const PotentialTable t = load_table((dir / "v.txt").string(), 5, 1);
  CHECK(t.points.rows() == 5);
  CHECK(t.points.cols() == 3);
  CHECK(t.values(0, 2) == -2.0);
  spit(dir / "bad.txt", "0 0 0 0 1.5\n");
  CHECK_THROWS_AS(load_table((dir / "bad.txt").string(), 5, 1), ConfigError);
  CHECK_THROWS_AS(load_table((dir / "missing.txt").string(), 5, 1), ConfigError);
}

TEST_CASE("number formatting and the landscape CSV") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(std::nan("")) == "NaN");

  GammaLandscape L;
  L.n = 2;
  LandscapeRow ok;
  ok.sample.mu = 0.5;
  ok.sample.xi = Eigen::Vector2d(1.0, -0.25);
  ok.sample.gamma = 2.0;
  ok.sample.g2_part = 3.0;
  ok.sample.correction_part = -1.0;
  ok.sample.quadrature_error = 1e-9;
  LandscapeRow bad = ok;
  bad.ok = false;
  bad.error = "integrand \"failed\"";
  L.rows = {ok, bad};
  CHECK(landscape_csv(L) ==
        "mu,xi_1,xi_2,gamma,g2_part,correction_part,quad_err,error\n"
        "0.5,1,-0.25,2,3,-1,1e-09,\"\"\n"
        "0.5,1,-0.25,NaN,NaN,NaN,NaN,\"integrand \"\"failed\"\"\"\n");
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  spit(dir / "bad.cfg", "dimension = 5\nunknown = 1\n");
  CHECK(run({"check-potentials", "--config", (dir / "bad.cfg").string()}) == kUsageError);
  CHECK(run({"frobnicate"}) == kUsageError);
  CHECK(run({}) == kUsageError);
  spit(dir / "len.cfg", "potential.A.center = 1, 2\n");
  CHECK(run({"scan", "--config", (dir / "len.cfg").string()}) == kUsageError);

  CHECK(run({"check-potentials", "--out", (dir / "ok").string()}) == kOk);

  spit(dir / "const.cfg", "potential.A.family = algebraic-decay\npotential.A.power = 0\n");
  CHECK(run({"check-potentials", "--config", (dir / "const.cfg").string(), "--out", (dir / "c").string()}) ==
        kCheckFailure);
  const auto report = nlohmann::json::parse(slurp(dir / "c" / "check-potentials_report.json"));
  CHECK(report["checks"][0]["name"] == "assumption A1");
  CHECK(report["checks"][0]["pass"] == false);
  CHECK(report["exit_code"] == kCheckFailure);
  // Scans refuse failing potentials unless forced.
  CHECK(run({"scan", "--config", (dir / "const.cfg").string(), "--out", (dir / "c").string()}) == kCheckFailure);
  CHECK_FALSE(fs::exists(dir / "c" / "gamma_landscape.csv"));

  spit(dir / "alpha.cfg", "alpha = 1.5\n");
  CHECK(run({"scan", "--config", (dir / "alpha.cfg").string(), "--out", (dir / "a").string()}) == kUsageError);

  spit(dir / "flat.cfg", std::string("potential.A.amplitude = 0, 0, 0, 0, 0\npotential.V.amplitude = 0\n") + kSmallBox);
  CHECK(run({"solve", "--config", (dir / "flat.cfg").string(), "--out", (dir / "f").string()}) == kNoSolution);
  const auto flat = nlohmann::json::parse(slurp(dir / "f" / "solve_report.json"));
  CHECK(flat["diagnostic"].get<std::string>().find("flat") != std::string::npos);
}

TEST_CASE("scan output: layout, A = 0 and byte-identical reruns") {
  const fs::path dir = scratch("scan");
  spit(dir / "s.cfg", std::string("potential.A.amplitude = 0, 0, 0, 0, 0\n") + kSmallBox);
  CHECK(run({"scan", "--config", (dir / "s.cfg").string(), "--out", (dir / "a").string()}) == kOk);
  CHECK(run({"scan", "--config", (dir / "s.cfg").string(), "--out", (dir / "a2").string(), "--threads", "1"}) ==
        kOk);
  const std::string csv = slurp(dir / "a" / "gamma_landscape.csv");
  CHECK(csv == slurp(dir / "a2" / "gamma_landscape.csv"));
  CHECK(csv.find('\r') == std::string::npos);

  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "mu,xi_1,xi_2,xi_3,xi_4,xi_5,gamma,g2_part,correction_part,quad_err,error");
  int rows = 0;
  double prev_mu = 0.0;
  while (std::getline(is, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    REQUIRE(cols.size() == 11);
    CHECK(cols[8] == "0");
    CHECK(cols[10] == "\"\"");
    const double mu = std::stod(cols[0]);
    CHECK(mu >= prev_mu);
    prev_mu = mu;
    ++rows;
  }
  CHECK(rows == 9);

  // Report: stable field order and a config echo that re-parses.
  const auto rep = nlohmann::ordered_json::parse(slurp(dir / "a" / "scan_report.json"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : rep.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"command", "config", "checks", "outputs", "warnings", "diagnostic",
                                         "exit_code"});
  const RunConfig echoed = parse_config(rep["config"].get<std::string>());
  RunConfig expect = parse_config(slurp(dir / "s.cfg"));
  expect.output = (dir / "a").string();
  CHECK(echoed == expect);
}
