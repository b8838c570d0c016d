// Command-line front end: solve, secular-curve export, parameter sweeps,
// oracle cross-check, schema.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qcls/qcls.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInternal = 3;

const char* case_name(qcls::InfeasibleCase c) {
  switch (c) {
    case qcls::InfeasibleCase::I: return "(i)";
    case qcls::InfeasibleCase::II: return "(ii)";
    case qcls::InfeasibleCase::III: return "(iii)";
    default: return "(<=)";
  }
}

struct EntryRef {
  char field = 'k';  // 'A', 'B', 'b', 't', 'k'
  std::size_t i = 0, j = 0;
};

EntryRef parse_param(const std::string& s) {
  if (s == "k") return {'k', 0, 0};
  static const std::regex mat(R"(([AB])\[(\d+)\]\[(\d+)\])");
  static const std::regex vec(R"(([bt])\[(\d+)\])");
  std::smatch m;
  if (std::regex_match(s, m, mat))
    return {m[1].str()[0], std::stoul(m[2]), std::stoul(m[3])};
  if (std::regex_match(s, m, vec)) return {m[1].str()[0], std::stoul(m[2]), 0};
  throw qcls::ParseError("sweep: --param must be k, A[i][j], B[i][j], b[i] or t[i]");
}

qcls::ProblemSpec with_entry(const qcls::ProblemSpec& base, const EntryRef& e, double v,
                             double tol_asym) {
  qcls::ProblemSpec w = base;
  switch (e.field) {
    case 'k': w.k = v; break;
    case 'b': w.b.at(e.i) = v; break;
    case 't': w.t.at(e.i) = v; break;
    case 'A': {
      qcls::Mat m = base.A.m;
      m(e.i, e.j) = v;
      m(e.j, e.i) = v;
      w.A = qcls::SymMatrix(m, tol_asym);
      break;
    }
    case 'B': {
      qcls::Mat m = base.B.m;
      m(e.i, e.j) = v;
      m(e.j, e.i) = v;
      w.B = qcls::SymMatrix(m, tol_asym);
      break;
    }
  }
  return w;
}

std::string classification_label(const qcls::SolveReport& rep) {
  std::string label;
  if (const auto* e = rep.find("inequality")) label = "inequality-" + e->decision;
  if (const auto* e = rep.find("psd-classification")) {
    if (!label.empty()) label += "/";
    label += e->decision;
  }
  if (const auto* e = rep.find("lagrangian-classification")) {
    if (!label.empty()) label += "/";
    label += e->decision;
    if (const auto* m = rep.find("multiplier-case")) label += "/" + m->decision;
  }
  if (const auto* e = rep.find("affine-constraint")) {
    if (!label.empty()) label += "/";
    label += "affine-" + e->decision;
  }
  return label.empty() ? "trivial" : label;
}

bool parse_triplet(const std::string& s, double& lo, double& hi, int& steps) {
  std::istringstream in(s);
  char c1 = 0, c2 = 0;
  return static_cast<bool>(in >> lo >> c1 >> hi >> c2 >> steps) && c1 == ':' && c2 == ':' &&
         steps >= 1;
}

bool parse_range(const std::string& s, double& lo, double& hi) {
  std::istringstream in(s);
  char c1 = 0;
  return static_cast<bool>(in >> lo >> c1 >> hi) && c1 == ':';
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw qcls::Error("cannot open output file: " + path);
  return file;
}

int run_solve(const std::string& path, bool ineq, bool as_json, int samples,
              std::optional<unsigned long long> seed, const qcls::SolverConfig& base) {
  qcls::ProblemFile pf = qcls::load_problem(path, base);
  if (ineq) pf.problem.sense = qcls::ConstraintSense::LessEqual;
  if (seed) pf.config.seed = *seed;
  if (samples >= 0) pf.config.sample_count = samples;

  qcls::SolveReport rep = qcls::solve(pf.problem, pf.config);
  std::vector<qcls::Vec> draws;
  if (rep.outcome.attained && pf.config.sample_count > 0)
    draws = qcls::sample(rep.outcome, pf.config.sample_count, pf.config.seed,
                         pf.config.sampler_box);

  if (as_json) {
    qcls::json j = qcls::report_to_json(rep);
    qcls::json s = qcls::json::array();
    for (const auto& x : draws) s.push_back(qcls::to_json(x));
    j["samples"] = std::move(s);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << qcls::report_to_text(rep);
    for (const auto& x : draws) {
      std::cout << "sample: (";
      for (std::size_t i = 0; i < x.size(); ++i) std::cout << (i ? ", " : "") << qcls::fmt(x[i]);
      std::cout << ")\n";
    }
  }
  return kExitOk;
}

int run_secular(const std::string& path, const std::string& grid, const std::string& out,
                const qcls::SolverConfig& base) {
  double lo, hi;
  int steps;
  if (!parse_triplet(grid, lo, hi, steps))
    throw qcls::ParseError("secular: --grid must be lo:hi:steps");
  qcls::ProblemFile pf = qcls::load_problem(path, base);
  qcls::SolveReport rep = qcls::solve(pf.problem, pf.config);
  if (!rep.drcf)
    throw qcls::NotApplicable("secular: problem resolves before the secular stage");
  qcls::SecularContext ctx = qcls::make_secular_context(*rep.drcf, pf.config);
  if (ctx.constant)
    throw qcls::NotApplicable("secular: secular function is constant for this problem");

  std::ofstream file;
  std::ostream& os = open_out(file, out);
  std::string poles = "poles";
  for (std::size_t i = 0; i < ctx.q(); ++i) poles += "," + qcls::fmt(1.0 / ctx.gamma(i));
  os << poles << "\n";
  os << "lambda_hat" << (rep.lambda_hat ? "," + qcls::fmt(*rep.lambda_hat) : "") << "\n";
  os << "lambda,f\n";
  for (int s = 0; s < steps; ++s) {
    const double l = steps == 1 ? lo : lo + (hi - lo) * s / double(steps - 1);
    try {
      const double f = qcls::secular_f(ctx, l);
      os << qcls::fmt(l) << "," << qcls::fmt(f) << "\n";
    } catch (const qcls::PoleProximity&) {
      // grid point outside the admissible interval: skipped
    }
  }
  return kExitOk;
}

int run_sweep(const std::string& path, const std::string& param, const std::string& range,
              int steps, const std::string& out, const qcls::SolverConfig& base) {
  double lo, hi;
  if (!parse_range(range, lo, hi)) throw qcls::ParseError("sweep: --range must be a:b");
  if (steps < 1) throw qcls::ParseError("sweep: --steps must be >= 1");
  const EntryRef entry = parse_param(param);
  qcls::ProblemFile pf = qcls::load_problem(path, base);
  const std::size_t n = pf.problem.dim();

  std::ofstream file;
  std::ostream& os = open_out(file, out);
  std::string header = "param,L,attained,classification,min_abs_margin";
  for (std::size_t i = 0; i < n; ++i) header += ",x" + std::to_string(i);
  os << header << "\n";

  for (int s = 0; s < steps; ++s) {
    const double v = steps == 1 ? lo : lo + (hi - lo) * s / double(steps - 1);
    std::string row = qcls::fmt(v);
    try {
      qcls::ProblemSpec w = with_entry(pf.problem, entry, v, pf.config.tol_asym);
      qcls::SolveReport rep = qcls::solve(w, pf.config);
      double min_margin = std::numeric_limits<double>::infinity();
      for (const auto& e : rep.trace)
        for (const auto& [key, val] : e.margins) min_margin = std::min(min_margin, std::abs(val));
      row += "," + qcls::fmt(rep.outcome.infimum);
      row += rep.outcome.attained ? ",1" : ",0";
      row += "," + classification_label(rep);
      row += "," + (std::isfinite(min_margin) ? qcls::fmt(min_margin) : std::string());
      for (std::size_t i = 0; i < n; ++i)
        row += "," + (rep.outcome.representative ? qcls::fmt((*rep.outcome.representative)[i])
                                                 : std::string());
    } catch (const qcls::Error& e) {
      row += ",,,error: " + std::string(e.what()) + ",";
      for (std::size_t i = 0; i < n; ++i) row += ",";
    }
    os << row << "\n";
  }
  return kExitOk;
}

int run_oracle(const std::string& path, int starts, unsigned long long seed, double box,
               const qcls::SolverConfig& base) {
  qcls::ProblemFile pf = qcls::load_problem(path, base);
  qcls::OracleOptions opt;
  opt.starts = starts;
  opt.seed = seed;
  opt.box = box;
  const qcls::OracleResult res = qcls::brute_force_min(pf.problem, opt);
  if (!res.found) {
    std::cout << "oracle: no feasible point found\n";
    return kExitInfeasible;
  }
  std::cout << "oracle L = " << qcls::fmt(res.value) << "\n";
  std::cout << "oracle x = (";
  for (std::size_t i = 0; i < res.argmin.size(); ++i)
    std::cout << (i ? ", " : "") << qcls::fmt(res.argmin[i]);
  std::cout << ")\n";
  const qcls::SolveReport rep = qcls::solve(pf.problem, pf.config);
  std::cout << "solver L = " << qcls::fmt(rep.outcome.infimum) << "\n";
  std::cout << "difference = " << qcls::fmt(res.value - rep.outcome.infimum) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global minimisation of a convex quadratic under one quadratic constraint"};
  app.require_subcommand(1);
  qcls::SolverConfig base;

  std::string file, out, grid = "-3:3:200", param = "k", range = "0:1";
  bool ineq = false, as_json = false;
  int samples = -1, steps = 11, starts = 400;
  std::optional<unsigned long long> seed;
  unsigned long long oracle_seed = 987654321ULL;
  double box = 4.0;

  auto add_tols = [&base](CLI::App* cmd) {
    cmd->add_option("--tol-rank", base.tol_rank);
    cmd->add_option("--tol-class", base.tol_class);
    cmd->add_option("--tol-feas", base.tol_feas);
    cmd->add_option("--tol-lambda", base.tol_lambda);
  };

  CLI::App* c_solve = app.add_subcommand("solve", "solve a problem file");
  c_solve->add_option("file", file)->required();
  c_solve->add_flag("--ineq", ineq, "treat the constraint as <= 0");
  c_solve->add_flag("--json", as_json, "emit the full report as JSON");
  c_solve->add_flag("--text", [](std::int64_t) {}, "emit the human-readable report (default)");
  c_solve->add_option("--samples", samples, "number of solution samples to print");
  c_solve->add_option("--seed", [&seed](const std::vector<std::string>& v) {
    seed = std::stoull(v.front());
    return true;
  }, "sampler seed");
  add_tols(c_solve);

  CLI::App* c_secular = app.add_subcommand("secular", "export the secular curve as CSV");
  c_secular->add_option("file", file)->required();
  c_secular->add_option("--grid", grid, "lo:hi:steps");
  c_secular->add_option("--out", out, "output CSV path (default stdout)");
  add_tols(c_secular);

  CLI::App* c_sweep = app.add_subcommand("sweep", "sweep one coefficient and solve each step");
  c_sweep->add_option("file", file)->required();
  c_sweep->add_option("--param", param, "k, A[i][j], B[i][j], b[i] or t[i]");
  c_sweep->add_option("--range", range, "a:b");
  c_sweep->add_option("--steps", steps, "number of steps");
  c_sweep->add_option("--out", out, "output CSV path (default stdout)");
  add_tols(c_sweep);

  CLI::App* c_oracle = app.add_subcommand("oracle", "brute-force cross-check");
  c_oracle->add_option("file", file)->required();
  c_oracle->add_option("--starts", starts, "multistart count");
  c_oracle->add_option("--seed", oracle_seed, "oracle RNG seed");
  c_oracle->add_option("--box", box, "start cube half-width");
  add_tols(c_oracle);

  CLI::App* c_schema = app.add_subcommand("schema", "print the problem file schema");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_schema->parsed()) {
      std::cout << qcls::problem_schema() << "\n";
      return kExitOk;
    }
    if (c_solve->parsed()) return run_solve(file, ineq, as_json, samples, seed, base);
    if (c_secular->parsed()) return run_secular(file, grid, out, base);
    if (c_sweep->parsed()) return run_sweep(file, param, range, steps, out, base);
    if (c_oracle->parsed()) return run_oracle(file, starts, oracle_seed, box, base);
  } catch (const qcls::ParseError& e) {
    std::cerr << "error [parse]: " << e.what() << "\n";
    return kExitParse;
  } catch (const qcls::InfeasibleConstraint& e) {
    std::cerr << "error [infeasible, case " << case_name(e.which) << "]: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const qcls::NotApplicable& e) {
    std::cerr << "error [not-applicable]: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
