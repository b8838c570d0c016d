// Problem-file parsing (JSON), report serialization, and CSV formatting.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcls/core.hpp"
#include "qcls/problem.hpp"
#include "qcls/solution_set.hpp"

namespace qcls {

struct ParseError : Error { using Error::Error; };

using json = nlohmann::json;

namespace detail {

inline double finite_number(const json& j, const std::string& where) {
  if (!j.is_number())
    throw ParseError("problem file: '" + where + "' must be a finite number");
  const double v = j.get<double>();
  if (!std::isfinite(v))
    throw ParseError("problem file: '" + where + "' is not finite");
  return v;
}

inline Vec parse_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError("problem file: '" + where + "' must be an array");
  Vec v;
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(finite_number(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline Mat parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ParseError("problem file: '" + where + "' must be a non-empty array of rows");
  const std::size_t n = j.size();
  Mat m(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec row = parse_vector(j[i], where + "[" + std::to_string(i) + "]");
    if (i == 0) {
      m = Mat(n, row.size());
    } else if (row.size() != m.cols) {
      throw ParseError("problem file: '" + where + "' rows have inconsistent lengths");
    }
    for (std::size_t k = 0; k < row.size(); ++k) m(i, k) = row[k];
  }
  return m;
}

}  // namespace detail

struct ProblemFile {
  ProblemSpec problem;
  SolverConfig config;
};

inline ProblemFile parse_problem(const json& doc, SolverConfig base = {}) {
  if (!doc.is_object()) throw ParseError("problem file: top level must be an object");
  for (const char* key : {"A", "B", "t", "b", "k"})
    if (!doc.contains(key))
      throw ParseError(std::string("problem file: missing required key '") + key + "'");

  ProblemFile pf;
  pf.config = base;
  if (doc.contains("config")) {
    const json& c = doc["config"];
    if (!c.is_object()) throw ParseError("problem file: 'config' must be an object");
    auto get = [&](const char* name, double& slot) {
      if (c.contains(name)) slot = detail::finite_number(c[name], std::string("config.") + name);
    };
    get("tol_rank", pf.config.tol_rank);
    get("tol_cluster", pf.config.tol_cluster);
    get("tol_class", pf.config.tol_class);
    get("tol_feas", pf.config.tol_feas);
    get("tol_secular", pf.config.tol_secular);
    get("tol_lambda", pf.config.tol_lambda);
    get("tol_asym", pf.config.tol_asym);
    get("pole_guard", pf.config.pole_guard);
    get("sampler_box", pf.config.sampler_box);
    if (c.contains("seed")) pf.config.seed = c["seed"].get<unsigned long long>();
    if (c.contains("sample_count")) pf.config.sample_count = c["sample_count"].get<int>();
  }

  const Mat A = detail::parse_matrix(doc["A"], "A");
  const Mat B = detail::parse_matrix(doc["B"], "B");
  pf.problem.t = detail::parse_vector(doc["t"], "t");
  pf.problem.b = detail::parse_vector(doc["b"], "b");
  pf.problem.k = detail::finite_number(doc["k"], "k");
  const std::size_t n = A.rows;
  if (A.cols != n || B.rows != n || B.cols != n || pf.problem.t.size() != n ||
      pf.problem.b.size() != n)
    throw ParseError("problem file: A, B, t, b must share one square dimension");
  try {
    pf.problem.A = SymMatrix(A, pf.config.tol_asym);
    pf.problem.B = SymMatrix(B, pf.config.tol_asym);
  } catch (const AsymmetricInput& e) {
    throw ParseError(std::string("problem file: ") + e.what());
  }
  if (doc.contains("sense")) {
    const std::string s = doc["sense"].get<std::string>();
    if (s == "eq") pf.problem.sense = ConstraintSense::Equality;
    else if (s == "le") pf.problem.sense = ConstraintSense::LessEqual;
    else throw ParseError("problem file: 'sense' must be \"eq\" or \"le\"");
  }
  return pf;
}

inline ProblemFile load_problem(const std::string& path, SolverConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("problem file: ") + e.what());
  }
  return parse_problem(doc, base);
}

inline const char* problem_schema() {
  return R"({
  "A":      "n x n array of arrays, symmetric positive semidefinite, nonzero",
  "B":      "n x n array of arrays, symmetric",
  "t":      "n array, objective target",
  "b":      "n array, constraint linear coefficient",
  "k":      "number, constraint constant",
  "sense":  "optional, \"eq\" (default) or \"le\"",
  "config": {
    "tol_rank": "optional number", "tol_cluster": "optional number",
    "tol_class": "optional number", "tol_feas": "optional number",
    "tol_secular": "optional number", "tol_lambda": "optional number",
    "tol_asym": "optional number", "pole_guard": "optional number",
    "sampler_box": "optional number", "seed": "optional integer",
    "sample_count": "optional integer"
  }
})";
}

// 17-significant-digit, '.'-decimal float formatting shared by CSV and text
// output so identical runs are byte-identical.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

inline json to_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline json report_to_json(const SolveReport& rep) {
  json j;
  j["infimum"] = rep.outcome.infimum;
  j["attained"] = rep.outcome.attained;
  if (rep.outcome.representative) j["representative"] = to_json(*rep.outcome.representative);
  if (rep.lambda_hat) j["lambda_hat"] = *rep.lambda_hat;
  j["warnings"] = rep.warnings;
  json trace = json::array();
  for (const auto& e : rep.trace) {
    json t;
    t["stage"] = e.stage;
    t["decision"] = e.decision;
    t["margins"] = json::object();
    for (const auto& [k, v] : e.margins) t["margins"][k] = v;
    trace.push_back(std::move(t));
  }
  j["trace"] = std::move(trace);
  if (rep.drcf) {
    json d;
    d["n_bar"] = rep.drcf->n_bar;
    d["has_null_variable"] = rep.drcf->has_y;
    d["diagonal"] = to_json(rep.drcf->Delta);
    d["target"] = to_json(rep.drcf->w0);
    d["epsilon"] = rep.drcf->epsilon;
    d["k_star"] = rep.drcf->k_star;
    j["reduced_form"] = std::move(d);
  }
  return j;
}

inline std::string report_to_text(const SolveReport& rep) {
  std::ostringstream os;
  os << "L = " << fmt(rep.outcome.infimum)
     << (rep.outcome.attained ? " (attained)" : " (infimum, not attained)") << "\n";
  if (rep.lambda_hat) os << "lambda_hat = " << fmt(*rep.lambda_hat) << "\n";
  if (rep.outcome.representative) {
    os << "x_hat = (";
    const Vec& x = *rep.outcome.representative;
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << fmt(x[i]);
    os << ")\n";
  }
  os << "trace:\n";
  for (const auto& e : rep.trace) {
    os << "  " << e.stage << ": " << e.decision;
    if (!e.margins.empty()) {
      os << "  [";
      bool first = true;
      for (const auto& [k, v] : e.margins) {
        os << (first ? "" : ", ") << k << "=" << fmt(v);
        first = false;
      }
      os << "]";
    }
    os << "\n";
  }
  for (const auto& w : rep.warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace qcls
