#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <fstream>

#include "helpers.hpp"

using namespace qcls;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(QCLS_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf;
  while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe))
    r.output.append(buf.data(), got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(QCLS_DATA) + "/" + name; }

}  // namespace

TEST_CASE("problem files parse with defaults and overrides") {
  const ProblemFile pf = load_problem(data("ex1.json"));
  CHECK(pf.problem.dim() == 3);
  CHECK(pf.problem.k == 1.0);
  CHECK(pf.problem.sense == ConstraintSense::Equality);

  const json doc = {
      {"A", {{1.0, 0.0}, {0.0, 1.0}}}, {"B", {{1.0, 0.0}, {0.0, 1.0}}},
      {"t", {0.0, 0.0}},               {"b", {0.0, 0.0}},
      {"k", 1.0},                      {"sense", "le"},
      {"config", {{"tol_feas", 1e-6}, {"seed", 42}}},
  };
  const ProblemFile pf2 = parse_problem(doc);
  CHECK(pf2.problem.sense == ConstraintSense::LessEqual);
  CHECK(pf2.config.tol_feas == 1e-6);
  CHECK(pf2.config.seed == 42);
}

TEST_CASE("problem files reject malformed input") {
  json missing = {{"A", {{1.0}}}, {"B", {{1.0}}}, {"t", {0.0}}, {"b", {0.0}}};
  CHECK_THROWS_AS(parse_problem(missing), ParseError);  // no k

  json ragged = {{"A", {{1.0, 0.0}, {0.0}}},
                 {"B", {{1.0, 0.0}, {0.0, 1.0}}},
                 {"t", {0.0, 0.0}},
                 {"b", {0.0, 0.0}},
                 {"k", 1.0}};
  CHECK_THROWS_AS(parse_problem(ragged), ParseError);

  json bad_sense = {{"A", {{1.0}}}, {"B", {{1.0}}}, {"t", {0.0}},
                    {"b", {0.0}},   {"k", 1.0},     {"sense", "maybe"}};
  CHECK_THROWS_AS(parse_problem(bad_sense), ParseError);

  json asym = {{"A", {{1.0, 0.0}, {0.0, 1.0}}},
               {"B", {{1.0, 5.0}, {0.0, 1.0}}},
               {"t", {0.0, 0.0}},
               {"b", {0.0, 0.0}},
               {"k", 1.0}};
  CHECK_THROWS_AS(parse_problem(asym), ParseError);

  json nonnum = {{"A", {{1.0}}}, {"B", {{1.0}}}, {"t", {"x"}}, {"b", {0.0}}, {"k", 1.0}};
  CHECK_THROWS_AS(parse_problem(nonnum), ParseError);
}

TEST_CASE("non-finite numbers are rejected") {
  json doc = {{"A", {{1.0}}}, {"B", {{1.0}}}, {"t", {0.0}}, {"b", {0.0}}, {"k", 1.0}};
  doc["k"] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(parse_problem(doc), ParseError);
  doc["k"] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(parse_problem(doc), ParseError);
}

TEST_CASE("float formatting is deterministic and round-trips") {
  CHECK(fmt(0.5) == "0.5");
  CHECK(fmt(1.0 / 3.0) == fmt(1.0 / 3.0));
  const double v = -0.52714505846832349;
  CHECK(std::stod(fmt(v)) == v);
}

TEST_CASE("report JSON carries the trace and margins") {
  const SolveReport rep = solve(testutil::appendix_problem(1.5));
  const json j = report_to_json(rep);
  CHECK(j["attained"] == true);
  CHECK(j.contains("lambda_hat"));
  bool has_canonical = false;
  for (const auto& e : j["trace"])
    if (e["stage"] == "canonical-form") {
      has_canonical = true;
      CHECK(std::abs(e["margins"]["k_star"].get<double>() - 1.0) < 1e-9);
    }
  CHECK(has_canonical);
  CHECK(j["reduced_form"]["n_bar"] == 3);
}

TEST_CASE("cli solve: worked examples and exit codes") {
  const RunResult ex1 = run_cli("solve " + data("ex1.json"));
  CHECK(ex1.exit_code == 0);
  CHECK(ex1.output.find("L = 0 (attained)") != std::string::npos);
  CHECK(ex1.output.find("x_hat = (1, 0, 0)") != std::string::npos);

  const RunResult ex2 = run_cli("solve " + data("ex2.json"));
  CHECK(ex2.exit_code == 0);
  CHECK(ex2.output.find("lambda_hat = -0.527") != std::string::npos);

  const RunResult inf = run_cli("solve " + data("infeasible.json"));
  CHECK(inf.exit_code == 2);
  CHECK(inf.output.find("case (i)") != std::string::npos);

  const RunResult missing = run_cli("solve /nonexistent.json");
  CHECK(missing.exit_code == 1);
}

TEST_CASE("cli solve --json emits a parseable report") {
  const RunResult r = run_cli("solve " + data("ex2.json") + " --json --samples 2");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.output);
  CHECK(std::abs(j["infimum"].get<double>() - 0.3696) < 5e-4);
  CHECK(j["samples"].size() == 2);
}

TEST_CASE("cli output is byte-deterministic") {
  const std::string cmd = "solve " + data("ex2.json") + " --json --samples 5 --seed 7";
  CHECK(run_cli(cmd).output == run_cli(cmd).output);
  const std::string sph = "solve " + data("sphere.json") + " --samples 5 --seed 3";
  CHECK(run_cli(sph).output == run_cli(sph).output);
}

TEST_CASE("cli secular: curve export and non-applicability") {
  const RunResult r = run_cli("secular " + data("ex2.json") + " --grid -3:0.45:47");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.rfind("poles,", 0) == 0);
  CHECK(r.output.find("lambda_hat,-0.527") != std::string::npos);
  // a row near lambda = 0 carries f close to 2
  {
    std::istringstream in(r.output);
    std::string line;
    bool near_zero_row = false;
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos || !std::isdigit(line[line.find_first_not_of('-')]))
        continue;
      const double l = std::stod(line.substr(0, comma));
      const double f = std::stod(line.substr(comma + 1));
      if (std::abs(l) < 0.05 && std::abs(f - 2.0) < 0.2) near_zero_row = true;
    }
    CHECK(near_zero_row);
  }

  const RunResult na = run_cli("secular " + data("sphere.json"));
  CHECK(na.exit_code == 3);
  CHECK(na.output.find("not-applicable") != std::string::npos);
}

TEST_CASE("cli sweep: hyperbola constant term crossing zero") {
  const RunResult r =
      run_cli("sweep " + data("hyperbola.json") + " --param k --range -0.01:0.01 --steps 3");
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.output);
  std::string line;
  std::getline(in, line);  // header
  CHECK(line.rfind("param,L,attained,classification", 0) == 0);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].find("boundary-q") != std::string::npos);
  CHECK(rows[1].find("multiply-Lagrangian") != std::string::npos);
  CHECK(rows[2].find("boundary-1") != std::string::npos);
}

TEST_CASE("cli sweep: appendix coupling entry moves between problem forms") {
  const RunResult r =
      run_cli("sweep " + data("ex1.json") + " --param A[2][2] --range 1:2.5 --steps 2");
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.output);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  CHECK(row0.find("perfect") != std::string::npos);
  CHECK(row1.find("singly-Lagrangian/interior") != std::string::npos);
}

TEST_CASE("cli oracle agrees with the solver on the worked example") {
  const RunResult r = run_cli("oracle " + data("ex2.json") + " --starts 60");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("oracle L = 0.3696") != std::string::npos);
  CHECK(r.output.find("solver L = 0.3696") != std::string::npos);
}

TEST_CASE("cli schema prints the file format") {
  const RunResult r = run_cli("schema");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"A\"") != std::string::npos);
  CHECK(r.output.find("sense") != std::string::npos);
}

TEST_CASE("cli solve --ineq switches the constraint sense") {
  const RunResult r = run_cli("solve " + data("sphere.json") + " --ineq --samples 0");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("L = 0 (attained)") != std::string::npos);
}
