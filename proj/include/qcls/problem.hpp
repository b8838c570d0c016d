// Problem quintuple (A, B, t, b, k), validation, and the constraint
// feasibility trichotomy.
#pragma once

#include <cmath>
#include <string>

#include "qcls/core.hpp"
#include "qcls/linalg.hpp"

namespace qcls {

enum class ConstraintSense { Equality, LessEqual };

// minimize (x-t)'A(x-t)  subject to  x'Bx + 2b'x - k  (= 0 or <= 0)
struct ProblemSpec {
  SymMatrix A;
  SymMatrix B;
  Vec t;
  Vec b;
  double k = 0.0;
  ConstraintSense sense = ConstraintSense::Equality;

  std::size_t dim() const { return A.n; }

  double scale() const {
    double s = std::max({1.0, max_abs(A.m), max_abs(B.m), norm_inf(t), norm_inf(b), std::abs(k)});
    return s;
  }
};

inline double eval_loss(const ProblemSpec& w, const Vec& x) {
  if (x.size() != w.dim()) throw DimensionMismatch("eval_loss: point dimension mismatch");
  const Vec d = vsub(x, w.t);
  return w.A.quad(d);
}

inline double eval_constraint(const ProblemSpec& w, const Vec& x) {
  if (x.size() != w.dim()) throw DimensionMismatch("eval_constraint: point dimension mismatch");
  return w.B.quad(x) + 2.0 * dot(w.b, x) - w.k;
}

// (B, b, k) -> (-B, -b, -k). Leaves the equality problem unchanged; realizes
// the reverse inequality for LessEqual.
inline ProblemSpec negate_constraint(const ProblemSpec& w) {
  ProblemSpec out = w;
  for (double& x : out.B.m.data) x = -x;
  for (double& x : out.b) x = -x;
  out.k = -w.k;
  return out;
}

struct Validation {
  std::size_t n = 0;
  std::size_t rank_A = 0;        // r
  Spectrum spec_A;
  double min_eigenvalue_A = 0.0; // convexity margin
};

inline Validation validate(const ProblemSpec& w, const SolverConfig& cfg = {}) {
  const std::size_t n = w.A.n;
  if (w.B.n != n || w.t.size() != n || w.b.size() != n)
    throw DimensionMismatch("validate: A, B, t, b must share one dimension");
  Validation v;
  v.n = n;
  v.spec_A = spectral_decompose(w.A, cfg.tol_cluster, "A");
  v.rank_A = numeric_rank(v.spec_A, cfg.tol_rank);
  if (v.rank_A == 0) throw ZeroObjectiveMatrix("validate: A must be nonzero");
  v.min_eigenvalue_A = v.spec_A.eigenvalues.back();
  if (v.min_eigenvalue_A < -cfg.tol_rank * v.spec_A.scale())
    throw NonConvexObjective("validate: A has a negative eigenvalue; objective not convex");
  return v;
}

struct FeasibilityAnalysis {
  Vec x_b;
  Vec b_perp;
  double k_plus = 0.0;
  bool feasible = true;
  InfeasibleCase which = InfeasibleCase::I;  // meaningful when !feasible
};

// Lemma-style trichotomy for insolvability of x'Bx + 2b'x = k, evaluated on
// the tolerant signature of B.
inline FeasibilityAnalysis feasibility_check(const SymMatrix& B, const Vec& b, double k,
                                             const SolverConfig& cfg = {}) {
  FeasibilityAnalysis out;
  auto [xb, bperp] = mp_split(B, b, cfg.tol_rank);
  out.x_b = xb;
  out.b_perp = bperp;
  out.k_plus = k + dot(b, xb);

  const Spectrum spec = spectral_decompose(B, cfg.tol_cluster, "B");
  const double cutoff = cfg.tol_rank * spec.scale();
  const std::size_t n = B.n;
  const std::size_t rank_B = numeric_rank(spec, cfg.tol_rank);
  const double bscale = std::max({1.0, norm_inf(b), std::abs(k)});
  const bool B_zero = rank_B == 0;
  const bool bperp_zero = norm_inf(out.b_perp) <= cfg.tol_class * bscale;
  const bool kplus_zero = std::abs(out.k_plus) <= cfg.tol_class * bscale;

  if (B_zero && bperp_zero && !kplus_zero) {
    out.feasible = false;
    out.which = InfeasibleCase::I;
    return out;
  }
  if (rank_B == n && !kplus_zero) {
    // (-k_plus B) > 0 iff every eigenvalue of B has sign opposite to k_plus
    bool pd = true;
    for (double e : spec.eigenvalues)
      if (-out.k_plus * e <= cutoff) pd = false;
    if (pd) {
      out.feasible = false;
      out.which = InfeasibleCase::II;
      return out;
    }
  }
  if (!B_zero && rank_B < n && bperp_zero && !kplus_zero) {
    bool has_positive = false;
    for (double e : spec.eigenvalues)
      if (out.k_plus * e > cutoff) has_positive = true;
    if (!has_positive) {
      out.feasible = false;
      out.which = InfeasibleCase::III;
      return out;
    }
  }
  return out;
}

inline FeasibilityAnalysis feasibility_check(const ProblemSpec& w, const SolverConfig& cfg = {}) {
  return feasibility_check(w.B, w.b, w.k, cfg);
}

}  // namespace qcls
