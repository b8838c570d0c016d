// Brute-force reference minimiser: random multistart, Newton projection onto
// the constraint surface, projected-gradient polish. Slow and only meant for
// cross-checking the analytic solver on small problems.
#pragma once

#include <cmath>
#include <optional>
#include <random>

#include "qcls/core.hpp"
#include "qcls/problem.hpp"

namespace qcls {

struct OracleOptions {
  int starts = 400;
  int polish_iters = 200;
  double box = 4.0;          // start cube half-width around t
  double proj_tol = 1e-12;   // relative |Q| accepted after projection
  unsigned long long seed = 987654321ULL;
};

struct OracleResult {
  double value = 0.0;
  Vec argmin;
  bool found = false;
};

namespace detail {

inline Vec constraint_gradient(const ProblemSpec& w, const Vec& x) {
  return vscale(2.0, vadd(matvec(w.B.m, x), w.b));
}

inline std::optional<Vec> project_to_surface(const ProblemSpec& w, Vec x, double tol) {
  for (int it = 0; it < 80; ++it) {
    const double q = eval_constraint(w, x);
    if (std::abs(q) <= tol) return x;
    const Vec g = constraint_gradient(w, x);
    const double gn2 = dot(g, g);
    if (gn2 < 1e-20) return std::nullopt;
    x = vsub(x, vscale(q / gn2, g));
  }
  return std::abs(eval_constraint(w, x)) <= tol ? std::optional<Vec>(x) : std::nullopt;
}

inline void polish_on_surface(const ProblemSpec& w, Vec& x, double& fx, int iters, double tol) {
  double step = 0.25;
  for (int it = 0; it < iters; ++it) {
    Vec g = vscale(2.0, matvec(w.A.m, vsub(x, w.t)));
    const Vec nr = constraint_gradient(w, x);
    const double nn2 = dot(nr, nr);
    if (nn2 > 1e-20) {
      const double c = dot(g, nr) / nn2;
      g = vsub(g, vscale(c, nr));
    }
    const double gn = norm2(g);
    if (gn < 1e-14) break;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      auto cand = project_to_surface(w, vsub(x, vscale(step / gn, g)), tol);
      if (cand) {
        const double fc = eval_loss(w, *cand);
        if (fc < fx - 1e-16) {
          x = std::move(*cand);
          fx = fc;
          moved = true;
          step *= 1.5;
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved && step < 1e-14) break;
  }
}

}  // namespace detail

inline OracleResult brute_force_min(const ProblemSpec& w, const OracleOptions& opt = {}) {
  const std::size_t n = w.dim();
  const double tol = opt.proj_tol * w.scale() + 1e-12;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> ud(-opt.box, opt.box);
  OracleResult best;
  const bool leq = w.sense == ConstraintSense::LessEqual;

  auto consider = [&](const Vec& x) {
    const double f = eval_loss(w, x);
    if (!best.found || f < best.value) {
      best.value = f;
      best.argmin = x;
      best.found = true;
    }
  };

  std::vector<Vec> starts;
  starts.push_back(w.t);
  for (std::size_t i = 0; i < n; ++i) {
    for (double s : {-1.0, 1.0}) {
      Vec e = w.t;
      e[i] += s * opt.box;
      starts.push_back(e);
    }
  }
  while (static_cast<int>(starts.size()) < opt.starts) {
    Vec x(n);
    for (auto& c : x) c = ud(rng);
    starts.push_back(vadd(w.t, x));
  }

  for (const auto& s : starts) {
    if (leq && eval_constraint(w, s) <= tol) consider(s);
    auto p = detail::project_to_surface(w, s, tol);
    if (!p) continue;
    double f = eval_loss(w, *p);
    detail::polish_on_surface(w, *p, f, opt.polish_iters, tol);
    consider(*p);
  }

  if (leq && best.found) {
    // descend toward the unconstrained minimiser while the region allows it
    Vec x = best.argmin;
    for (int it = 0; it < 200; ++it) {
      const Vec g = vscale(2.0, matvec(w.A.m, vsub(x, w.t)));
      const double gn = norm2(g);
      if (gn < 1e-14) break;
      bool moved = false;
      for (double step = 0.5; step > 1e-14; step *= 0.5) {
        const Vec cand = vsub(x, vscale(step / gn, g));
        if (eval_constraint(w, cand) <= tol && eval_loss(w, cand) < eval_loss(w, x) - 1e-16) {
          x = cand;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    consider(x);
  }
  return best;
}

}  // namespace qcls
