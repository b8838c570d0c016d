// Solving regular dimension-reduced canonical forms: secular function,
// bounds, Lagrangian classification, interior root finding, the boundary
// multiplier cases, and the lift back to canonical coordinates.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "qcls/core.hpp"
#include "qcls/solution_set.hpp"
#include "qcls/transforms.hpp"

namespace qcls {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SecularContext {
  DrcfSpec drcf;
  double lambda_hi = 0.0;   // 1/gamma_1
  double lambda_lo = -kInf; // 1/gamma_q when gamma_q < 0, else -inf
  double f_lo = -kInf;
  double f_hi = kInf;
  bool constant = false;    // delta = 0 and epsilon = 0: f == -k*

  std::size_t q() const { return drcf.q(); }
  double gamma(std::size_t i) const { return drcf.gamma(i); }
  double delta(std::size_t i) const { return drcf.delta(i); }
};

// f(lambda) = sum (1 - lambda g_i)^{-2} g_i d_i^2 + 2 e^2 lambda - k*
inline double secular_f(const SecularContext& ctx, double lambda) {
  const double guard = 1e-13;
  auto near_pole = [&](double pole) {
    return std::abs(lambda - pole) <= guard * std::max(1.0, std::abs(pole));
  };
  if (lambda >= ctx.lambda_hi || near_pole(ctx.lambda_hi))
    throw PoleProximity("secular_f: lambda at or beyond 1/gamma_1");
  if (ctx.lambda_lo > -kInf && (lambda <= ctx.lambda_lo || near_pole(ctx.lambda_lo)))
    throw PoleProximity("secular_f: lambda at or beyond 1/gamma_q");
  double f = 2.0 * ctx.drcf.epsilon * ctx.drcf.epsilon * lambda - ctx.drcf.k_star;
  for (std::size_t i = 0; i < ctx.q(); ++i) {
    const double u = 1.0 - lambda * ctx.gamma(i);
    const double d = ctx.delta(i);
    f += ctx.gamma(i) * d * d / (u * u);
  }
  return f;
}

inline double secular_f_deriv(const SecularContext& ctx, double lambda) {
  double df = 2.0 * ctx.drcf.epsilon * ctx.drcf.epsilon;
  for (std::size_t i = 0; i < ctx.q(); ++i) {
    const double g = ctx.gamma(i), d = ctx.delta(i);
    const double u = 1.0 - lambda * g;
    df += 2.0 * g * g * d * d / (u * u * u);
  }
  return df;
}

struct BoundaryData {
  bool is_b1 = true;
  std::optional<double> y_hat;  // epsilon / gamma, present when the y variable exists
  Vec z_fixed;                  // the q-1 pinned z components
  double f_val = 0.0;           // f_1 or f_q
  double zeta = 0.0;
};

namespace detail {

inline BoundaryData boundary_data(const SecularContext& ctx, bool b1) {
  const std::size_t q = ctx.q();
  const double g_pin = b1 ? ctx.gamma(0) : ctx.gamma(q - 1);
  BoundaryData bd;
  bd.is_b1 = b1;
  double fv = -ctx.drcf.k_star;
  if (ctx.drcf.has_y) {
    bd.y_hat = ctx.drcf.epsilon / g_pin;
    fv += 2.0 * ctx.drcf.epsilon * *bd.y_hat;
  }
  for (std::size_t i = 0; i < q; ++i) {
    if ((b1 && i == 0) || (!b1 && i == q - 1)) continue;
    const double zi = ctx.delta(i) / (1.0 - ctx.gamma(i) / g_pin);
    bd.z_fixed.push_back(zi);
    fv += ctx.gamma(i) * zi * zi;
  }
  bd.f_val = fv;
  return bd;
}

}  // namespace detail

inline SecularContext make_secular_context(const DrcfSpec& drcf, const SolverConfig& cfg = {}) {
  SecularContext ctx;
  ctx.drcf = drcf;
  const std::size_t q = ctx.q();
  const double g1 = ctx.gamma(0), gq = ctx.gamma(q - 1);
  ctx.lambda_hi = 1.0 / g1;
  ctx.lambda_lo = gq < 0.0 ? 1.0 / gq : -kInf;

  double dscale = 0.0;
  for (std::size_t i = 0; i < q; ++i) dscale = std::max(dscale, ctx.delta(i));
  const double tol = cfg.tol_class * std::max(1.0, dscale);
  bool delta_zero = true;
  for (std::size_t i = 0; i < q; ++i)
    if (ctx.delta(i) > tol) delta_zero = false;
  const bool eps_zero = !drcf.has_y;

  if (delta_zero && eps_zero) {
    ctx.constant = true;
    ctx.f_lo = ctx.f_hi = -drcf.k_star;
    return ctx;
  }
  ctx.f_hi = ctx.delta(0) > tol ? kInf : detail::boundary_data(ctx, true).f_val;
  if (gq < 0.0)
    ctx.f_lo = ctx.delta(q - 1) > tol ? -kInf : detail::boundary_data(ctx, false).f_val;
  else
    ctx.f_lo = eps_zero ? -drcf.k_star : -kInf;
  return ctx;
}

// ---------------------------------------------------------------------------
// Lagrangian classification

enum class LagrangianKind { NonLagrangian, MultiplyLagrangian, SinglyLagrangian };

inline const char* to_string(LagrangianKind k) {
  switch (k) {
    case LagrangianKind::NonLagrangian: return "non-Lagrangian";
    case LagrangianKind::MultiplyLagrangian: return "multiply-Lagrangian";
    default: return "singly-Lagrangian";
  }
}

struct LagrangianClass {
  LagrangianKind kind = LagrangianKind::SinglyLagrangian;
  double k_star_margin = 0.0;   // |k*|
  double delta_margin = 0.0;    // max delta_i
  double epsilon_margin = 0.0;
};

inline LagrangianClass classify_lagrangian(const SecularContext& ctx,
                                           const SolverConfig& cfg = {}) {
  LagrangianClass out;
  const std::size_t q = ctx.q();
  double dmax = 0.0;
  for (std::size_t i = 0; i < q; ++i) dmax = std::max(dmax, ctx.delta(i));
  out.k_star_margin = std::abs(ctx.drcf.k_star);
  out.delta_margin = dmax;
  out.epsilon_margin = ctx.drcf.epsilon;

  const double tol = cfg.tol_class * std::max(1.0, std::max(dmax, std::abs(ctx.drcf.k_star)));
  const bool k_zero = std::abs(ctx.drcf.k_star) <= tol;
  const bool delta_zero = dmax <= tol;
  const bool m0_zero = !ctx.drcf.has_y;
  const double gq = ctx.gamma(q - 1);

  if (m0_zero && k_zero && !delta_zero && gq > 0.0)
    out.kind = LagrangianKind::NonLagrangian;
  else if (m0_zero && k_zero && delta_zero)
    out.kind = LagrangianKind::MultiplyLagrangian;
  else
    out.kind = LagrangianKind::SinglyLagrangian;
  return out;
}

// ---------------------------------------------------------------------------
// Interior multiplier (Case A)

struct InteriorSolution {
  double lambda_hat = 0.0;
  Vec w_hat;
};

inline std::optional<InteriorSolution> solve_case_A(const SecularContext& ctx,
                                                    const SolverConfig& cfg = {}) {
  if (ctx.constant || !(ctx.f_lo < 0.0 && 0.0 < ctx.f_hi)) return std::nullopt;

  auto f = [&](double l) { return secular_f(ctx, l); };

  // bracket upper end: step geometrically toward the 1/gamma_1 pole
  double h = cfg.pole_guard * std::abs(ctx.lambda_hi) + 1e-12;
  double hi = ctx.lambda_hi - h;
  int steps = 0;
  while (f(hi) <= 0.0) {
    h *= 0.25;
    hi = ctx.lambda_hi - h;
    if (++steps > 400)
      throw BracketFailure("solve_case_A: no positive secular value near 1/gamma_1");
  }
  double lo;
  if (ctx.lambda_lo > -kInf) {
    double hl = cfg.pole_guard * std::abs(ctx.lambda_lo) + 1e-12;
    lo = ctx.lambda_lo + hl;
    steps = 0;
    while (f(lo) >= 0.0) {
      hl *= 0.25;
      lo = ctx.lambda_lo + hl;
      if (++steps > 400)
        throw BracketFailure("solve_case_A: no negative secular value near 1/gamma_q");
    }
  } else {
    double width = std::max(1.0, std::abs(hi));
    lo = hi - width;
    steps = 0;
    while (f(lo) >= 0.0) {
      width *= 2.0;
      lo = hi - width;
      if (++steps > 2000)
        throw BracketFailure("solve_case_A: no negative secular value on the unbounded side");
    }
  }

  while (hi - lo > cfg.tol_lambda * std::max({1.0, std::abs(hi), std::abs(lo)})) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  double lambda = 0.5 * (lo + hi);

  // Newton polish inside the bracket
  const double ftol = cfg.tol_secular * (1.0 + std::abs(ctx.drcf.k_star));
  for (int it = 0; it < 60 && std::abs(f(lambda)) > ftol; ++it) {
    const double step = f(lambda) / secular_f_deriv(ctx, lambda);
    double next = lambda - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    (f(next) < 0.0 ? lo : hi) = next;
    lambda = next;
  }

  InteriorSolution s;
  s.lambda_hat = lambda;
  if (ctx.drcf.has_y) s.w_hat.push_back(lambda * ctx.drcf.epsilon);
  for (std::size_t i = 0; i < ctx.q(); ++i)
    s.w_hat.push_back(ctx.delta(i) / (1.0 - lambda * ctx.gamma(i)));
  return s;
}

// Boundary cases: nonempty iff the pinned delta vanishes and f_1 <= 0
// (resp. f_q >= 0).
inline std::optional<BoundaryData> solve_boundary(const SecularContext& ctx, bool b1,
                                                  const SolverConfig& cfg = {}) {
  const std::size_t q = ctx.q();
  if (!b1 && !(ctx.gamma(q - 1) < 0.0))
    throw Error("solve_boundary: B_q requires gamma_q < 0");
  double dscale = 0.0;
  for (std::size_t i = 0; i < q; ++i) dscale = std::max(dscale, ctx.delta(i));
  const double tol = cfg.tol_class * std::max(1.0, dscale);
  const double d_pin = b1 ? ctx.delta(0) : ctx.delta(q - 1);
  if (d_pin > tol) return std::nullopt;
  BoundaryData bd = detail::boundary_data(ctx, b1);
  if (b1) {
    if (bd.f_val > 0.0) return std::nullopt;
    bd.zeta = std::sqrt(-bd.f_val / ctx.gamma(0));
  } else {
    if (bd.f_val < 0.0) return std::nullopt;
    bd.zeta = std::sqrt(bd.f_val / (-ctx.gamma(q - 1)));
  }
  return bd;
}

// ---------------------------------------------------------------------------
// Full resolution of a regular dimension-reduced canonical form.

enum class DrcfSolutionKind { Origin, Interior, BoundaryB1, BoundaryBq };

struct DrcfOutcome {
  LagrangianClass lagrangian;
  DrcfSolutionKind kind = DrcfSolutionKind::Origin;
  double L_star = 0.0;
  std::optional<double> lambda_hat;
  Vec w_hat;                       // point solution (Origin/Interior)
  std::optional<BoundaryData> boundary;
  double f_lo = 0.0, f_hi = 0.0;
};

inline DrcfOutcome solve_drcf(const DrcfSpec& drcf, const SolverConfig& cfg = {}) {
  const SecularContext ctx = make_secular_context(drcf, cfg);
  const std::size_t q = ctx.q();
  DrcfOutcome out;
  out.lagrangian = classify_lagrangian(ctx, cfg);
  out.f_lo = ctx.f_lo;
  out.f_hi = ctx.f_hi;

  if (out.lagrangian.kind == LagrangianKind::NonLagrangian) {
    out.kind = DrcfSolutionKind::Origin;
    out.w_hat = Vec(drcf.n_bar, 0.0);
    double L = 0.0;
    for (std::size_t i = 0; i < q; ++i) L += ctx.delta(i) * ctx.delta(i);
    out.L_star = L;
    return out;
  }
  if (out.lagrangian.kind == LagrangianKind::MultiplyLagrangian) {
    out.kind = DrcfSolutionKind::Origin;
    out.w_hat = Vec(drcf.n_bar, 0.0);
    out.L_star = 0.0;
    return out;
  }

  const double gq = ctx.gamma(q - 1);
  const double eps = drcf.epsilon;
  auto lift_sum = [&](double mult) {
    // mult^2 { l0^2 + sum (1 - mult g_i)^{-2} l_i^2 } over the non-pinned terms
    double s = eps * eps;
    for (std::size_t i = 0; i < q; ++i) {
      const double li = ctx.delta(i) * std::abs(ctx.gamma(i));
      const double u = 1.0 - mult * ctx.gamma(i);
      if (std::abs(u) < 1e-300) continue;  // pinned term, excluded by caller
      s += li * li / (u * u);
    }
    return mult * mult * s;
  };

  const bool want_interior = gq > 0.0 ? ctx.f_hi > 0.0 : (ctx.f_lo < 0.0 && 0.0 < ctx.f_hi);
  if (want_interior) {
    auto s = solve_case_A(ctx, cfg);
    if (!s) throw BracketFailure("solve_drcf: dispatch chose the interior case but no root found");
    out.kind = DrcfSolutionKind::Interior;
    out.lambda_hat = s->lambda_hat;
    out.w_hat = s->w_hat;
    out.L_star = lift_sum(s->lambda_hat);
    return out;
  }
  const bool want_b1 = gq > 0.0 ? true : ctx.f_hi <= 0.0;
  auto bd = solve_boundary(ctx, want_b1, cfg);
  if (!bd)
    throw BracketFailure(std::string("solve_drcf: dispatch chose ") + (want_b1 ? "B1" : "Bq") +
                         " but its own test reports it empty (near-boundary input)");
  out.kind = want_b1 ? DrcfSolutionKind::BoundaryB1 : DrcfSolutionKind::BoundaryBq;
  out.boundary = bd;
  const double g_pin = want_b1 ? ctx.gamma(0) : ctx.gamma(q - 1);
  // L* = g_pin^{-2} { l0^2 + sum_{i != pin} (1 - g_i/g_pin)^{-2} l_i^2 } + zeta^2
  double s = eps * eps;
  for (std::size_t i = 0; i < q; ++i) {
    if ((want_b1 && i == 0) || (!want_b1 && i == q - 1)) continue;
    const double li = ctx.delta(i) * std::abs(ctx.gamma(i));
    const double u = 1.0 - ctx.gamma(i) / g_pin;
    s += li * li / (u * u);
  }
  out.L_star = s / (g_pin * g_pin) + bd->zeta * bd->zeta;
  return out;
}

// ---------------------------------------------------------------------------
// Lift a drcf outcome to the canonical coordinates of omega*.

inline SolutionSet lift_to_canonical(const DrcfOutcome& out, const CanonicalData& cd,
                                     const SolverConfig& cfg = {}) {
  SolutionSet set;
  set.infimum = out.L_star;
  set.attained = true;

  const bool has_y = out.boundary ? out.boundary->y_hat.has_value()
                                  : (out.w_hat.size() == cd.q + 1);
  double y_hat = 0.0;
  Vec z(cd.q, 0.0);
  std::optional<std::size_t> free_block;  // eigenvalue block with +- zeta
  double zeta = 0.0;

  if (out.boundary) {
    const BoundaryData& bd = *out.boundary;
    if (bd.y_hat) y_hat = *bd.y_hat;
    const std::size_t pin = bd.is_b1 ? 0 : cd.q - 1;
    std::size_t j = 0;
    for (std::size_t i = 0; i < cd.q; ++i) {
      if (i == pin) continue;
      z[i] = bd.z_fixed[j++];
    }
    free_block = pin;
    zeta = bd.zeta;
  } else {
    std::size_t off = 0;
    if (has_y) y_hat = out.w_hat[off++];
    for (std::size_t i = 0; i < cd.q; ++i) z[i] = out.w_hat[off + i];
  }

  Vec rep;
  auto push_pinned_block = [&](std::size_t dim, double first) {
    Vec v(dim, 0.0);
    if (dim > 0) v[0] = first;
    rep.insert(rep.end(), v.begin(), v.end());
    set.blocks.push_back(block::Pinned{std::move(v)});
  };

  if (cd.m0 > 0) push_pinned_block(cd.m0, y_hat);

  double dscale = 0.0;
  for (double d : cd.delta) dscale = std::max(dscale, d);
  const double tol = cfg.tol_class * std::max(1.0, dscale);

  for (std::size_t i = 0; i < cd.q; ++i) {
    const std::size_t mi = cd.mults[i];
    if (free_block && *free_block == i) {
      // delta_i = 0 here; sign (m_i = 1) or whole-sphere (m_i > 1) indeterminacy
      if (zeta <= 1e-300) {
        push_pinned_block(mi, 0.0);
      } else if (mi == 1) {
        set.blocks.push_back(block::SignPair{zeta});
        rep.push_back(zeta);
      } else {
        set.blocks.push_back(block::Sphere{mi, zeta});
        rep.push_back(zeta);
        for (std::size_t kk = 1; kk < mi; ++kk) rep.push_back(0.0);
      }
      continue;
    }
    if (cd.delta[i] > tol || std::abs(z[i]) <= 1e-300 || mi == 1) {
      push_pinned_block(mi, z[i]);
    } else {
      // delta_i = 0 with a nonzero magnitude: orthogonally indeterminate
      set.blocks.push_back(block::Sphere{mi, std::abs(z[i])});
      rep.push_back(std::abs(z[i]));
      for (std::size_t kk = 1; kk < mi; ++kk) rep.push_back(0.0);
    }
  }
  set.representative = rep;
  return set;
}

}  // namespace qcls
