#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace qcls;

namespace {

DrcfSpec make_drcf(Vec gammas, Vec deltas, double k_star, double eps = 0.0) {
  DrcfSpec d;
  d.has_y = eps > 0.0;
  if (d.has_y) {
    d.Delta.push_back(0.0);
    d.w0.push_back(0.0);
    d.epsilon = eps;
  }
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    d.Delta.push_back(gammas[i]);
    d.w0.push_back(deltas[i]);
  }
  d.n_bar = d.Delta.size();
  d.k_star = k_star;
  return d;
}

DrcfSpec worked_example_drcf() {
  return make_drcf({2.0, 1.0, 1.0 / 3.0},
                   {3.0 / std::sqrt(10.0), 1.0, std::sqrt(3.0 / 5.0)}, 1.0);
}

// closed form of the worked example's secular function
double f_closed(double l) {
  return 9.0 / (5.0 * (1.0 - 2.0 * l) * (1.0 - 2.0 * l)) + 1.0 / ((1.0 - l) * (1.0 - l)) +
         9.0 / (5.0 * (3.0 - l) * (3.0 - l)) - 1.0;
}

}  // namespace

TEST_CASE("secular function matches the worked example's closed form") {
  const SecularContext ctx = make_secular_context(worked_example_drcf());
  CHECK(secular_f(ctx, 0.0) == Catch::Approx(2.0).margin(1e-12));
  for (double l : {-3.0, -1.7, -0.5, 0.3, 0.45})
    CHECK(secular_f(ctx, l) == Catch::Approx(f_closed(l)).margin(1e-10));
}

TEST_CASE("secular bounds for the worked example") {
  const SecularContext ctx = make_secular_context(worked_example_drcf());
  CHECK(ctx.lambda_hi == Catch::Approx(0.5));
  CHECK(ctx.lambda_lo == -std::numeric_limits<double>::infinity());
  CHECK(ctx.f_lo == Catch::Approx(-1.0));  // -k* since gamma_q > 0, eps = 0
  CHECK(ctx.f_hi == std::numeric_limits<double>::infinity());
  CHECK_FALSE(ctx.constant);
}

TEST_CASE("secular function rejects pole evaluations") {
  const SecularContext ctx = make_secular_context(worked_example_drcf());
  CHECK_THROWS_AS(secular_f(ctx, 0.5), PoleProximity);
  CHECK_THROWS_AS(secular_f(ctx, 0.7), PoleProximity);

  const SecularContext hyp = make_secular_context(make_drcf({1.0, -1.0}, {0.3, 0.3}, 0.5));
  CHECK(hyp.lambda_lo == Catch::Approx(-1.0));
  CHECK_THROWS_AS(secular_f(hyp, -1.0), PoleProximity);
  CHECK_THROWS_AS(secular_f(hyp, -2.0), PoleProximity);
}

TEST_CASE("secular function is strictly increasing on the admissible interior") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> gdist(0.1, 3.0), ddist(0.0, 2.0), kdist(-2.0, 2.0);
  std::uniform_int_distribution<int> qdist(1, 4), sign(0, 1);
  for (int inst = 0; inst < 50; ++inst) {
    Vec g, d;
    const int q = qdist(rng);
    for (int i = 0; i < q; ++i) {
      g.push_back(gdist(rng) * (sign(rng) && i > 0 ? -1.0 : 1.0));
      d.push_back(ddist(rng));
    }
    std::sort(g.begin(), g.end(), std::greater<>());
    const SecularContext ctx =
        make_secular_context(make_drcf(g, d, kdist(rng), sign(rng) ? 0.8 : 0.0));
    if (ctx.constant) continue;

    const double hi = ctx.lambda_hi;
    const double lo = std::isfinite(ctx.lambda_lo) ? ctx.lambda_lo : hi - 20.0;
    const double width = hi - lo;
    std::uniform_real_distribution<double> inside(lo + 0.02 * width, hi - 0.02 * width);
    for (int pair = 0; pair < 100; ++pair) {
      double l1 = inside(rng), l2 = inside(rng);
      if (l1 > l2) std::swap(l1, l2);
      if (l2 - l1 < 1e-9) continue;
      CHECK(secular_f(ctx, l1) < secular_f(ctx, l2));
    }
  }
}

TEST_CASE("Lagrangian classification trichotomy") {
  // k* = 0, delta != 0, all gammas positive, no null variable
  const SecularContext non =
      make_secular_context(make_drcf({2.0, 1.0}, {1.0, 0.5}, 0.0));
  CHECK(classify_lagrangian(non).kind == LagrangianKind::NonLagrangian);

  // k* = 0, delta = 0
  const SecularContext multi = make_secular_context(make_drcf({1.0, -1.0}, {0.0, 0.0}, 0.0));
  CHECK(classify_lagrangian(multi).kind == LagrangianKind::MultiplyLagrangian);

  CHECK(classify_lagrangian(make_secular_context(worked_example_drcf())).kind ==
        LagrangianKind::SinglyLagrangian);
  // indefinite diagonal with k* = 0 and delta != 0 is still singly-Lagrangian
  const SecularContext indef = make_secular_context(make_drcf({1.0, -1.0}, {0.5, 0.0}, 0.0));
  CHECK(classify_lagrangian(indef).kind == LagrangianKind::SinglyLagrangian);
}

TEST_CASE("interior root for the worked example") {
  const SecularContext ctx = make_secular_context(worked_example_drcf());
  const auto sol = solve_case_A(ctx);
  REQUIRE(sol.has_value());
  CHECK(sol->lambda_hat == Catch::Approx(-0.527).margin(5e-3));
  CHECK(std::abs(secular_f(ctx, sol->lambda_hat)) < 1e-10 * 2.0);
  REQUIRE(sol->w_hat.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(sol->w_hat[i] ==
          Catch::Approx(ctx.delta(i) / (1.0 - sol->lambda_hat * ctx.gamma(i))).margin(1e-12));
}

TEST_CASE("boundary case B1: sphere-like instance") {
  const SecularContext ctx = make_secular_context(make_drcf({1.0}, {0.0}, 1.0));
  const auto bd = solve_boundary(ctx, true);
  REQUIRE(bd.has_value());
  CHECK(bd->zeta == Catch::Approx(1.0));
  CHECK(bd->f_val == Catch::Approx(-1.0));
  // nonzero pinned delta blocks the boundary case
  const SecularContext blocked = make_secular_context(make_drcf({1.0}, {0.5}, 1.0));
  CHECK_FALSE(solve_boundary(blocked, true).has_value());
}

TEST_CASE("boundary case Bq on the hyperbola") {
  const SecularContext ctx = make_secular_context(make_drcf({1.0, -1.0}, {0.0, 0.0}, -0.01));
  const auto bd = solve_boundary(ctx, false);
  REQUIRE(bd.has_value());
  CHECK(bd->zeta == Catch::Approx(0.1));
  CHECK_THROWS_AS(solve_boundary(make_secular_context(worked_example_drcf()), false), Error);
}

TEST_CASE("full drcf resolution dispatches per the bound signs") {
  // interior: worked example
  const DrcfOutcome interior = solve_drcf(worked_example_drcf());
  CHECK(interior.kind == DrcfSolutionKind::Interior);
  CHECK(interior.L_star == Catch::Approx(0.3696).margin(5e-4));

  // boundary-1: hyperbola with positive k*
  const DrcfOutcome b1 = solve_drcf(make_drcf({1.0, -1.0}, {0.0, 0.0}, 0.01));
  CHECK(b1.kind == DrcfSolutionKind::BoundaryB1);
  CHECK(b1.L_star == Catch::Approx(0.01));

  // boundary-q: hyperbola with negative k*
  const DrcfOutcome bq = solve_drcf(make_drcf({1.0, -1.0}, {0.0, 0.0}, -0.01));
  CHECK(bq.kind == DrcfSolutionKind::BoundaryBq);
  CHECK(bq.L_star == Catch::Approx(0.01));

  // origin outcomes
  const DrcfOutcome non = solve_drcf(make_drcf({2.0, 1.0}, {1.0, 0.5}, 0.0));
  CHECK(non.kind == DrcfSolutionKind::Origin);
  CHECK(non.L_star == Catch::Approx(1.25));  // sum of squared deltas
  const DrcfOutcome multi = solve_drcf(make_drcf({1.0, -1.0}, {0.0, 0.0}, 0.0));
  CHECK(multi.L_star == 0.0);
}

TEST_CASE("stationarity and feasibility hold at every returned drcf solution") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> gdist(0.2, 3.0), ddist(0.0, 1.5), kdist(-2.0, 2.0);
  std::uniform_int_distribution<int> qdist(1, 4), coin(0, 1);
  int checked = 0;
  while (checked < 60) {
    Vec g, d;
    const int q = qdist(rng);
    for (int i = 0; i < q; ++i) {
      g.push_back(gdist(rng) * (coin(rng) && i > 0 ? -1.0 : 1.0));
      d.push_back(coin(rng) ? ddist(rng) : 0.0);
    }
    std::sort(g.begin(), g.end(), std::greater<>());
    bool distinct = g[0] > 0.0;
    for (int i = 1; i < q; ++i)
      if (g[i - 1] - g[i] < 1e-3) distinct = false;
    if (!distinct) continue;
    const double eps = coin(rng) ? ddist(rng) : 0.0;
    const DrcfSpec drcf = make_drcf(g, d, kdist(rng), eps);

    DrcfOutcome out;
    try {
      out = solve_drcf(drcf);
    } catch (const BracketFailure&) {
      continue;  // genuinely ambiguous near-boundary draw
    }
    ++checked;

    // reconstruct a concrete solution w
    Vec w(drcf.n_bar, 0.0);
    double lambda = 0.0;
    if (out.kind == DrcfSolutionKind::Interior) {
      w = out.w_hat;
      lambda = *out.lambda_hat;
    } else if (out.kind == DrcfSolutionKind::Origin) {
      w = out.w_hat;
      lambda = 0.0;  // multiply-Lagrangian: any; non-Lagrangian: limit case
    } else {
      const BoundaryData& bd = *out.boundary;
      const std::size_t pin = bd.is_b1 ? 0 : drcf.q() - 1;
      lambda = 1.0 / drcf.gamma(pin);
      std::size_t off = drcf.has_y ? 1 : 0, j = 0;
      if (bd.y_hat) w[0] = *bd.y_hat;
      for (std::size_t i = 0; i < drcf.q(); ++i)
        w[off + i] = i == pin ? bd.zeta : bd.z_fixed[j++];
    }

    // constraint: sum gamma_i w_i^2 + 2 eps y - k* = 0
    double cons = -drcf.k_star;
    std::size_t off = drcf.has_y ? 1 : 0;
    if (drcf.has_y) cons += 2.0 * drcf.epsilon * w[0];
    for (std::size_t i = 0; i < drcf.q(); ++i)
      cons += drcf.gamma(i) * w[off + i] * w[off + i];
    if (out.kind != DrcfSolutionKind::Origin ||
        classify_lagrangian(make_secular_context(drcf)).kind ==
            LagrangianKind::MultiplyLagrangian)
      CHECK(std::abs(cons) < 1e-7);

    // normal equations (1 - lambda gamma_i) w_i = delta_i; Hessian I - lambda Delta psd
    if (out.kind == DrcfSolutionKind::Interior || out.kind == DrcfSolutionKind::BoundaryB1 ||
        out.kind == DrcfSolutionKind::BoundaryBq) {
      if (drcf.has_y) CHECK(w[0] == Catch::Approx(lambda * drcf.epsilon).margin(1e-8));
      for (std::size_t i = 0; i < drcf.q(); ++i) {
        const double lhs = (1.0 - lambda * drcf.gamma(i)) * w[off + i];
        CHECK(lhs == Catch::Approx(drcf.delta(i)).margin(1e-8));
        CHECK(1.0 - lambda * drcf.gamma(i) >= -1e-10);
      }
      // loss equals the reported optimum
      double loss = 0.0;
      for (std::size_t i = 0; i < drcf.n_bar; ++i) {
        const double dmw = w[i] - drcf.w0[i];
        loss += dmw * dmw;
      }
      CHECK(loss == Catch::Approx(out.L_star).margin(1e-7));
    }
  }
}

TEST_CASE("constant secular function flagged and classified") {
  const SecularContext ctx = make_secular_context(make_drcf({1.0, 0.5}, {0.0, 0.0}, 1.0));
  CHECK(ctx.constant);
  CHECK(ctx.f_lo == Catch::Approx(-1.0));
  CHECK(ctx.f_hi == Catch::Approx(-1.0));
}

TEST_CASE("lift to canonical coordinates: sphere produces a sphere factor") {
  CanonicalData cd;
  cd.q = 1;
  cd.m0 = 0;
  cd.s = 3;
  cd.gammas = {1.0};
  cd.mults = {3};
  cd.lengths = {0.0};
  cd.delta = {0.0};
  cd.epsilon = 0.0;
  cd.k_star = 1.0;
  const DrcfOutcome out = solve_drcf(dimension_reduce(cd));
  const SolutionSet set = lift_to_canonical(out, cd);
  REQUIRE(set.blocks.size() == 1);
  const auto* sph = std::get_if<block::Sphere>(&set.blocks[0]);
  REQUIRE(sph != nullptr);
  CHECK(sph->dim == 3);
  CHECK(sph->radius == Catch::Approx(1.0));
  CHECK(set.infimum == Catch::Approx(1.0));
}
