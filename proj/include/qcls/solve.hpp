// End-to-end solver: validation, feasibility, reduction chain, branch
// dispatch, and assembly of the solution set with a decision trace.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "qcls/core.hpp"
#include "qcls/problem.hpp"
#include "qcls/psd.hpp"
#include "qcls/secular.hpp"
#include "qcls/solution_set.hpp"
#include "qcls/transforms.hpp"

namespace qcls {
namespace detail {

// A point with x'Bx + 2b'x - k <= 0, or nullopt when the region is empty.
inline std::optional<Vec> leq_point(const SymMatrix& B, const Vec& b, double k,
                                    const SolverConfig& cfg = {}) {
  auto [xb, bperp] = mp_split(B, b, cfg.tol_rank);
  const double kp = k + dot(b, xb);
  const double scale = std::max({1.0, max_abs(B.m), norm_inf(b), std::abs(k)});
  Vec base = vscale(-1.0, xb);
  if (kp >= -cfg.tol_class * scale) return base;  // Q(-x_b) = -k_plus <= 0
  if (norm_inf(bperp) > cfg.tol_class * scale)
    return vadd(vscale(kp / (2.0 * dot(bperp, bperp)), bperp), base);
  const Spectrum spec = spectral_decompose(B, cfg.tol_cluster, "B");
  const double gmin = spec.eigenvalues.back();
  if (gmin < -cfg.tol_rank * spec.scale()) {
    Vec v(B.n);
    for (std::size_t i = 0; i < B.n; ++i) v[i] = spec.basis(i, B.n - 1);
    return vadd(vscale(std::sqrt(kp / gmin), v), base);
  }
  return std::nullopt;  // B psd on the residual: Q >= -k_plus > 0 everywhere
}

// Full least-squares core: A = I_n, t = 0, equality constraint known solvable.
inline SolveReport solve_centred_full(const ProblemSpec& w, const SolverConfig& cfg) {
  const std::size_t n = w.dim();
  const double scale = w.scale();
  SolveReport rep;

  if (max_abs(w.B.m) <= cfg.tol_class * scale) {
    // affine constraint 2b'x = k
    SolutionSet set;
    set.attained = true;
    if (norm_inf(w.b) <= cfg.tol_class * scale) {
      if (std::abs(w.k) > cfg.tol_class * scale)
        throw InfeasibleConstraint(InfeasibleCase::I, "constraint reduces to 0 = k with k != 0");
      set.infimum = 0.0;
      set.blocks.push_back(block::Pinned{Vec(n, 0.0)});
      set.representative = Vec(n, 0.0);
      rep.trace.push_back({"affine-constraint", "vacuous", {{"abs_k", std::abs(w.k)}}});
    } else {
      const double bn2 = dot(w.b, w.b);
      Vec x = vscale(w.k / (2.0 * bn2), w.b);
      set.infimum = w.k * w.k / (4.0 * bn2);
      set.blocks.push_back(block::Pinned{x});
      set.representative = x;
      rep.trace.push_back({"affine-constraint", "hyperplane", {{"norm_b", std::sqrt(bn2)}}});
    }
    rep.outcome = std::move(set);
    return rep;
  }

  ProblemSpec wn = w;
  const Spectrum specB = spectral_decompose(w.B, cfg.tol_cluster, "B");
  const bool negated = specB.eigenvalues.front() <= cfg.tol_rank * specB.scale();
  if (negated) wn = negate_constraint(w);
  rep.trace.push_back({"sign-normalisation", negated ? "negated" : "kept",
                       {{"max_eigenvalue_B", specB.eigenvalues.front()}}});

  CanonicalForm cf = to_canonical_form(wn, cfg);
  rep.trace.push_back({"canonical-form", "q=" + std::to_string(cf.data.q),
                       {{"k_star", cf.data.k_star},
                        {"epsilon", cf.data.epsilon},
                        {"m0", double(cf.data.m0)},
                        {"rank_B", double(cf.data.s)}}});

  DrcfSpec drcf = dimension_reduce(cf.data, cfg);
  DrcfOutcome out = solve_drcf(drcf, cfg);

  TraceEntry lag{"lagrangian-classification", to_string(out.lagrangian.kind),
                 {{"abs_k_star", out.lagrangian.k_star_margin},
                  {"max_delta", out.lagrangian.delta_margin},
                  {"epsilon", out.lagrangian.epsilon_margin}}};
  rep.trace.push_back(std::move(lag));

  TraceEntry mc{"multiplier-case", "", {{"L_star", out.L_star}}};
  switch (out.kind) {
    case DrcfSolutionKind::Origin: mc.decision = "origin"; break;
    case DrcfSolutionKind::Interior: mc.decision = "interior"; break;
    case DrcfSolutionKind::BoundaryB1: mc.decision = "boundary-1"; break;
    case DrcfSolutionKind::BoundaryBq: mc.decision = "boundary-q"; break;
  }
  if (std::isfinite(out.f_lo)) mc.margins["f_lower"] = out.f_lo;
  if (std::isfinite(out.f_hi)) mc.margins["f_upper"] = out.f_hi;
  if (out.lambda_hat) mc.margins["lambda_hat"] = *out.lambda_hat;
  if (out.boundary) mc.margins["zeta"] = out.boundary->zeta;
  rep.trace.push_back(std::move(mc));

  SolutionSet set = lift_to_canonical(out, cf.data, cfg);
  TransformChain ch;
  ch.append(cf.map);
  rep.outcome = pull_back(std::move(set), ch);
  rep.drcf = drcf;
  rep.lambda_hat = out.lambda_hat;
  return rep;
}

// Equality solve of a centred problem (A = diag(I_r, O), t = 0). The returned
// set's chain is relative to the centred coordinates.
inline SolveReport solve_centred(const ProblemSpec& wc, std::size_t r, const SolverConfig& cfg) {
  const std::size_t n = wc.dim();
  if (r == n) return solve_centred_full(wc, cfg);

  SimplifiedForm sf = to_simplified_form(wc, r, cfg);
  SolveReport rep;
  rep.trace.push_back({"simplified-form", "s0=" + std::to_string(sf.data.s0),
                       {{"k1", sf.data.k1},
                        {"norm_c0", norm_inf(sf.data.c0)},
                        {"max_C10", max_abs(sf.data.C10)}}});
  SimplifiedForm sd = to_simultaneous_diagonal(sf.problem, sf.data, cfg);
  rep.trace.push_back({"simultaneous-diagonal", "", {}});

  SolveReport inner = solve_psd(
      sd, [&cfg](const ProblemSpec& w1) { return solve_centred_full(w1, cfg); }, cfg);

  TransformChain ch;
  ch.append(sf.map);
  ch.append(sd.map);
  rep.outcome = pull_back(std::move(inner.outcome), ch);
  for (auto& e : inner.trace) rep.trace.push_back(std::move(e));
  for (auto& m : inner.warnings) rep.warnings.push_back(std::move(m));
  rep.drcf = inner.drcf;
  rep.lambda_hat = inner.lambda_hat;
  return rep;
}

inline void check_solution(const ProblemSpec& w, SolveReport& rep, const SolverConfig& cfg) {
  if (!rep.outcome.representative) return;
  const Vec& x = *rep.outcome.representative;
  const double res = eval_constraint(w, x);
  const double tol = cfg.tol_feas * w.scale();
  const bool ok = w.sense == ConstraintSense::LessEqual ? res <= tol : std::abs(res) <= tol;
  if (!ok)
    rep.warnings.push_back("representative constraint residual " + std::to_string(res) +
                           " exceeds tolerance");
  const double loss = eval_loss(w, x);
  if (std::abs(loss - rep.outcome.infimum) > cfg.tol_feas * std::max(1.0, std::abs(loss)))
    rep.warnings.push_back("representative loss deviates from reported infimum");
}

}  // namespace detail

inline SolveReport solve_equality(const ProblemSpec& w, const SolverConfig& cfg = {}) {
  const Validation v = validate(w, cfg);
  const FeasibilityAnalysis fa = feasibility_check(w, cfg);
  if (!fa.feasible) {
    const char* which = fa.which == InfeasibleCase::I ? "I"
                        : fa.which == InfeasibleCase::II ? "II" : "III";
    throw InfeasibleConstraint(fa.which,
                               std::string("constraint set is empty (insolvability case ") +
                                   which + ")");
  }
  SolveReport rep;
  rep.trace.push_back({"feasibility", "nonempty",
                       {{"k_plus", fa.k_plus}, {"norm_b_perp", norm_inf(fa.b_perp)}}});
  CentredForm cform = to_centred_ls(w, v, cfg);
  rep.trace.push_back({"centred-ls", "r=" + std::to_string(cform.r),
                       {{"min_eigenvalue_A", v.min_eigenvalue_A},
                        {"rank_A", double(v.rank_A)}}});

  SolveReport inner = detail::solve_centred(cform.problem, cform.r, cfg);
  TransformChain ch;
  ch.append(cform.map);
  rep.outcome = pull_back(std::move(inner.outcome), ch);
  for (auto& e : inner.trace) rep.trace.push_back(std::move(e));
  for (auto& m : inner.warnings) rep.warnings.push_back(std::move(m));
  rep.drcf = inner.drcf;
  rep.lambda_hat = inner.lambda_hat;
  detail::check_solution(w, rep, cfg);
  return rep;
}

inline SolveReport solve_inequality(const ProblemSpec& w, const SolverConfig& cfg = {}) {
  const Validation v = validate(w, cfg);
  const std::size_t n = v.n, r = v.rank_A;
  const FeasibilityAnalysis fa = feasibility_check(w, cfg);

  SolveReport rep;
  if (!fa.feasible) {
    // the constraint never vanishes, so it has one sign everywhere
    if (fa.k_plus < 0.0)
      throw InfeasibleConstraint(InfeasibleCase::EmptyLeq,
                                 "the <= 0 region is empty (constraint is positive everywhere)");
    rep.trace.push_back({"inequality", "vacuous", {{"k_plus", fa.k_plus}}});
    CentredForm cform = to_centred_ls(w, v, cfg);
    SolutionSet set;
    set.infimum = 0.0;
    set.blocks.push_back(block::Pinned{Vec(r, 0.0)});
    if (r < n)
      set.blocks.push_back(
          block::AffineSubspace{n - r, Vec(n - r, 0.0), detail::full_basis(n - r)});
    set.representative = Vec(n, 0.0);
    TransformChain ch;
    ch.append(cform.map);
    rep.outcome = pull_back(std::move(set), ch);
    detail::check_solution(w, rep, cfg);
    return rep;
  }

  rep.trace.push_back({"feasibility", "nonempty",
                       {{"k_plus", fa.k_plus}, {"norm_b_perp", norm_inf(fa.b_perp)}}});
  CentredForm cform = to_centred_ls(w, v, cfg);
  const ProblemSpec& wc = cform.problem;
  rep.trace.push_back({"centred-ls", "r=" + std::to_string(cform.r),
                       {{"min_eigenvalue_A", v.min_eigenvalue_A},
                        {"rank_A", double(v.rank_A)}}});
  TransformChain ch;
  ch.append(cform.map);

  bool trivial = false;
  SolutionSet set;
  if (r == n) {
    const double q0 = eval_constraint(wc, Vec(n, 0.0));
    if (q0 <= cfg.tol_feas * wc.scale()) {
      trivial = true;
      rep.trace.push_back({"inequality", "interior-optimum", {{"constraint_at_target", q0}}});
      set.infimum = 0.0;
      set.blocks.push_back(block::Pinned{Vec(n, 0.0)});
      set.representative = Vec(n, 0.0);
    }
  } else {
    const std::size_t n0 = n - r;
    Mat B00(n0, n0);
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t j = 0; j < n0; ++j) B00(i, j) = wc.B(r + i, r + j);
    Vec b0(wc.b.begin() + r, wc.b.end());
    auto p = detail::leq_point(SymMatrix(B00), b0, wc.k, cfg);
    if (p) {
      trivial = true;
      rep.trace.push_back({"inequality", "fiber-region", {}});
      set.infimum = 0.0;
      set.blocks.push_back(block::Pinned{Vec(r, 0.0)});
      set.blocks.push_back(block::QuadricRegion{B00, b0, wc.k, *p});
      Vec repv(r, 0.0);
      repv.insert(repv.end(), p->begin(), p->end());
      set.representative = std::move(repv);
    }
  }

  if (trivial) {
    rep.outcome = pull_back(std::move(set), ch);
  } else {
    rep.trace.push_back({"inequality", "boundary-optimum", {}});
    ProblemSpec weq = wc;
    weq.sense = ConstraintSense::Equality;
    SolveReport inner = detail::solve_centred(weq, r, cfg);
    rep.outcome = pull_back(std::move(inner.outcome), ch);
    for (auto& e : inner.trace) rep.trace.push_back(std::move(e));
    for (auto& m : inner.warnings) rep.warnings.push_back(std::move(m));
    rep.drcf = inner.drcf;
    rep.lambda_hat = inner.lambda_hat;
  }
  detail::check_solution(w, rep, cfg);
  return rep;
}

inline SolveReport solve(const ProblemSpec& w, const SolverConfig& cfg = {}) {
  return w.sense == ConstraintSense::LessEqual ? solve_inequality(w, cfg)
                                               : solve_equality(w, cfg);
}

}  // namespace qcls
