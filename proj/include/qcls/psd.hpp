// Rank-deficient objective (r < n): classify the simplified form as perfect,
// essentially perfect, or imperfect, and assemble the solution set, delegating
// the projected r-dimensional problem to a full least-squares solver handle.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "qcls/core.hpp"
#include "qcls/secular.hpp"
#include "qcls/solution_set.hpp"
#include "qcls/transforms.hpp"

namespace qcls {

enum class PsdCase { Perfect, EssentiallyPerfect, ProjectedImperfect };

inline const char* to_string(PsdCase c) {
  switch (c) {
    case PsdCase::Perfect: return "perfect";
    case PsdCase::EssentiallyPerfect: return "essentially-perfect";
    default: return "projected-imperfect";
  }
}

struct PsdClassification {
  PsdCase kind = PsdCase::Perfect;
  std::string branch;   // "s0-zero", "s0-full", "s0-mid"
  bool k1_zero = false;
  bool c0_zero = false;
  bool C10_zero = false;
  bool k1_gamma_pos = false;  // k1 Gamma0 has a positive eigenvalue
  double k1_abs = 0.0;
  double c0_norm = 0.0;
  double C10_max = 0.0;
};

inline PsdClassification classify_psd(const SimplifiedFormData& d, double scale,
                                      const SolverConfig& cfg = {}) {
  PsdClassification c;
  const std::size_t nf = d.c0.size();
  const double tol = cfg.tol_class * std::max(1.0, scale);
  c.k1_abs = std::abs(d.k1);
  c.c0_norm = norm_inf(d.c0);
  c.C10_max = max_abs(d.C10);
  c.k1_zero = c.k1_abs <= tol;
  c.c0_zero = c.c0_norm <= tol;
  c.C10_zero = c.C10_max <= tol;
  for (double g : d.gamma0)
    if (d.k1 * g > 0.0) c.k1_gamma_pos = true;

  if (d.s0 == 0) {
    c.branch = "s0-zero";
    if (!c.c0_zero || c.k1_zero) c.kind = PsdCase::Perfect;
    else c.kind = c.C10_zero ? PsdCase::ProjectedImperfect : PsdCase::EssentiallyPerfect;
  } else if (nf == 0) {
    c.branch = "s0-full";
    if (c.k1_zero || c.k1_gamma_pos) c.kind = PsdCase::Perfect;
    else c.kind = PsdCase::ProjectedImperfect;
  } else {
    c.branch = "s0-mid";
    if (!c.c0_zero || c.k1_zero || c.k1_gamma_pos) c.kind = PsdCase::Perfect;
    else c.kind = c.C10_zero ? PsdCase::ProjectedImperfect : PsdCase::EssentiallyPerfect;
  }
  return c;
}

namespace detail {

// Orthonormal basis of the hyperplane {y : c'y = const} directions.
inline std::vector<Vec> hyperplane_basis(const Vec& c) {
  const std::size_t nf = c.size();
  const Mat H = orthogonal_with_first_column(vscale(1.0 / norm2(c), c));
  std::vector<Vec> basis;
  for (std::size_t j = 1; j < nf; ++j) {
    Vec col(nf);
    for (std::size_t i = 0; i < nf; ++i) col[i] = H(i, j);
    basis.push_back(std::move(col));
  }
  return basis;
}

inline std::vector<Vec> full_basis(std::size_t nf) {
  std::vector<Vec> basis;
  for (std::size_t j = 0; j < nf; ++j) {
    Vec e(nf, 0.0);
    e[j] = 1.0;
    basis.push_back(std::move(e));
  }
  return basis;
}

inline Vec slice_center(const Vec& gamma0, const Vec& d0) {
  Vec c(gamma0.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = -d0[i] / gamma0[i];
  return c;
}

// Deterministic member of the alpha-level slice of (Gamma0, d0).
inline Vec slice_point(const Vec& gamma0, const Vec& d0, double alpha) {
  Vec z = slice_center(gamma0, d0);
  if (alpha == 0.0) return z;
  for (std::size_t j = 0; j < gamma0.size(); ++j) {
    if (alpha * gamma0[j] > 0.0) {
      z[j] += std::sqrt(alpha / gamma0[j]);
      return z;
    }
  }
  throw NoFeasiblePoints("slice_point: level not attainable");
}

}  // namespace detail

using FullLsSolver = std::function<SolveReport(const ProblemSpec&)>;

// Solves a simplified-form problem (A = diag(I_r, O), t = 0, r < n). The
// returned set lives in the simplified coordinates; the caller pulls it back.
inline SolveReport solve_psd(const SimplifiedForm& sf, const FullLsSolver& full_ls,
                             const SolverConfig& cfg = {}) {
  const SimplifiedFormData& d = sf.data;
  const std::size_t n = sf.problem.dim(), r = d.r, s0 = d.s0;
  const std::size_t nf = n - r - s0;
  const PsdClassification cls = classify_psd(d, sf.problem.scale(), cfg);

  SolveReport rep;
  rep.trace.push_back({"psd-classification",
                       std::string(to_string(cls.kind)) + "/" + cls.branch,
                       {{"abs_k1", cls.k1_abs},
                        {"norm_c0", cls.c0_norm},
                        {"max_C10", cls.C10_max},
                        {"k1_gamma_positive", cls.k1_gamma_pos ? 1.0 : 0.0}}});

  if (cls.kind == PsdCase::Perfect) {
    SolutionSet set;
    set.infimum = 0.0;
    set.attained = true;
    set.blocks.push_back(block::Pinned{Vec(r, 0.0)});
    Vec x0rep;
    if (s0 == 0) {
      if (cls.c0_zero) {
        set.blocks.push_back(block::AffineSubspace{nf, Vec(nf, 0.0), detail::full_basis(nf)});
        x0rep = Vec(nf, 0.0);
      } else {
        Vec offset = vscale(d.k / (2.0 * dot(d.c0, d.c0)), d.c0);
        x0rep = offset;
        set.blocks.push_back(
            block::AffineSubspace{nf, std::move(offset), detail::hyperplane_basis(d.c0)});
      }
    } else if (nf == 0) {
      const double alpha = cls.k1_zero ? 0.0 : d.k1;
      x0rep = detail::slice_point(d.gamma0, d.d0, alpha);
      set.blocks.push_back(block::QuadricSlice{d.gamma0, d.d0, alpha});
    } else if (cls.c0_zero) {
      const double alpha = cls.k1_zero ? 0.0 : d.k1;
      set.blocks.push_back(block::AffineSubspace{nf, Vec(nf, 0.0), detail::full_basis(nf)});
      set.blocks.push_back(block::QuadricSlice{d.gamma0, d.d0, alpha});
      x0rep = Vec(nf, 0.0);
      const Vec z = detail::slice_point(d.gamma0, d.d0, alpha);
      x0rep.insert(x0rep.end(), z.begin(), z.end());
    } else {
      set.blocks.push_back(block::UnionOverLinear{d.c0, d.gamma0, d.d0, d.k1});
      x0rep = vscale(d.k1 / (2.0 * dot(d.c0, d.c0)), d.c0);
      const Vec z = detail::slice_center(d.gamma0, d.d0);
      x0rep.insert(x0rep.end(), z.begin(), z.end());
    }
    Vec repv(r, 0.0);
    repv.insert(repv.end(), x0rep.begin(), x0rep.end());
    set.representative = std::move(repv);
    rep.outcome = std::move(set);
    return rep;
  }

  if (cls.kind == PsdCase::EssentiallyPerfect) {
    SolutionSet set;
    set.infimum = 0.0;
    set.attained = false;
    // Feasible points of loss at most eta approach the infeasible projection
    // target along a direction where the cross block C10 is active.
    const SimplifiedFormData data = d;
    set.approach = [data, r, s0, nf](double eta) {
      std::size_t jbest = 0;
      double best = -1.0;
      for (std::size_t j = 0; j < nf; ++j) {
        double n2 = 0.0;
        for (std::size_t i = 0; i < r; ++i) n2 += data.C10(i, j) * data.C10(i, j);
        if (n2 > best) { best = n2; jbest = j; }
      }
      Vec w(r);
      for (std::size_t i = 0; i < r; ++i) w[i] = data.C10(i, jbest);
      const double wn = norm2(w);
      const double s = std::sqrt(std::max(eta, 1e-300)) / 2.0;
      Vec x1 = vscale(s / wn, w);
      Vec v = matvec(transpose(data.C10), x1);
      const double q1 = dot(x1, matvec(data.B11, x1)) + 2.0 * dot(data.b1, x1) - data.k1;
      Vec y0 = vscale(-q1 / (2.0 * dot(v, v)), v);
      Vec x = x1;
      x.insert(x.end(), y0.begin(), y0.end());
      for (std::size_t j = 0; j < s0; ++j) x.push_back(-data.d0[j] / data.gamma0[j]);
      return x;
    };
    rep.outcome = std::move(set);
    rep.warnings.push_back("infimum 0 is not attained; use the approach sampler");
    return rep;
  }

  // Projected imperfect: solve the r-dimensional problem (I_r, B11, 0, b1, k1).
  ProblemSpec w1;
  w1.A = SymMatrix::identity(r);
  w1.B = SymMatrix(d.B11);
  w1.t = Vec(r, 0.0);
  w1.b = d.b1;
  w1.k = d.k1;
  SolveReport inner = full_ls(w1);

  SolutionSet set;
  set.infimum = inner.outcome.infimum;
  set.attained = inner.outcome.attained;
  for (const auto& g : inner.outcome.chain.maps)
    set.chain.append(TransformChain::embed_leading(g, n));
  set.blocks = inner.outcome.blocks;
  if (nf > 0)
    set.blocks.push_back(block::AffineSubspace{nf, Vec(nf, 0.0), detail::full_basis(nf)});
  Vec z0;
  if (s0 > 0) {
    z0 = detail::slice_center(d.gamma0, d.d0);
    set.blocks.push_back(block::Pinned{z0});
  }
  if (inner.outcome.representative) {
    Vec repv = *inner.outcome.representative;
    repv.resize(r + nf, 0.0);
    repv.insert(repv.end(), z0.begin(), z0.end());
    set.representative = std::move(repv);
  }
  rep.outcome = std::move(set);
  for (auto& e : inner.trace) rep.trace.push_back(std::move(e));
  for (auto& m : inner.warnings) rep.warnings.push_back(std::move(m));
  rep.drcf = inner.drcf;
  rep.lambda_hat = inner.lambda_hat;
  return rep;
}

}  // namespace qcls
