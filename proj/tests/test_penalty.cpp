#include <doctest.h>

#include "dcopt/penalty.hpp"
#include "dcopt/problems.hpp"
#include "helpers.hpp"

using namespace dcopt;
using namespace dcopt::testing;

TEST_CASE("unconstrained convex program stops after one outer iteration") {
  const DCProgram prog = convex_program(vec2(1.5, -0.5), true);
  PenaltyConfig cfg;
  cfg.sca.delta = [](int) { return 1e-12; };
  const SolveReport r = penalty_solve(prog, cfg, vec2(3.0, 3.0));
  CHECK(r.stop == StopReason::kUnconstrained);
  REQUIRE(r.iterations.size() == 1);
  CHECK((r.x_final - vec2(0.5, 0.0)).norm() <= 1e-11);
  CHECK(r.violation == 0.0);
  CHECK(r.iterations[0].merit == doctest::Approx(r.objective).epsilon(1e-15));
}

TEST_CASE("worked example with p=2 converges to 0") {
  const DCProgram prog = example_4_1();
  PenaltyConfig cfg;
  cfg.p = 2;
  cfg.max_outer = 25;
  const SolveReport r = penalty_solve(prog, cfg, vec1(0.0));
  CHECK(r.stop == StopReason::kMaxOuter);
  REQUIRE(r.iterations.size() == 25);
  for (const OuterIteration& it : r.iterations) {
    CAPTURE(it.k);
    // rho_k = rho0 sigma^k exactly.
    CHECK(it.rho == std::ldexp(cfg.rho0, it.k));
    CHECK(verify_inexact_condition(prog, it.rho, PenaltyMode{2}, it.x, cfg.eps, it.eta, 20).worst_margin >= -1e-8);
    // The subproblem optimum is 5/(2 rho).
    const GridMin grid =
        grid_minimize([&](const Vec& x) { return penalty_value(prog, it.rho, 2, x); }, 1, -60.0, 60.0, 2001, 10);
    CHECK(grid.x[0] == doctest::Approx(5.0 / (2.0 * it.rho)).epsilon(1e-4));
    if (it.rho >= 1e4) CHECK(std::abs(it.x[0]) <= 5.0 / (2.0 * it.rho) + 1e-6);
  }
  CHECK(std::abs(r.x_final[0]) <= 1e-4);
  CHECK(r.violation <= 1e-4);
}

TEST_CASE("exact penalty reaches the halfspace from an infeasible start") {
  const DCProgram prog = halfspace_program();
  PenaltyConfig cfg;
  cfg.p = 1;
  cfg.max_outer = 60;
  const SolveReport r = penalty_solve(prog, cfg, vec2(2.0, 2.0));
  CHECK(r.stop == StopReason::kRelativeChange);
  CHECK(r.violation <= 1e-6);
  CHECK(r.x_final[0] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(r.x_final[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("p=2 violation trend on the halfspace") {
  // Subproblem optimum x1 = 1 / (1 + 2 rho).
  const DCProgram prog = halfspace_program();
  PenaltyConfig cfg;
  cfg.p = 2;
  cfg.rho0 = 1.0;
  cfg.max_outer = 30;
  cfg.outer_rel_tol = 0.0;
  const SolveReport r = penalty_solve(prog, cfg, vec2(2.0, -2.0));
  for (std::size_t k = 1; k < r.iterations.size(); ++k) {
    const OuterIteration& prev = r.iterations[k - 1];
    const OuterIteration& it = r.iterations[k];
    const double slack = prev.eta + 0.5 * default_delta(0) * default_delta(0);
    CHECK(it.violation * it.violation <= prev.violation * prev.violation + slack);
  }
  CHECK(r.violation <= 2.0 / (1.0 + 2.0 * r.iterations.back().rho));
}

TEST_CASE("replays are identical") {
  Rng rng(77);
  const DCProgram prog = random_program(rng, 3, 2);
  PenaltyConfig cfg;
  cfg.max_outer = 15;
  const Vec x0 = rng.normal_vector(3);
  const SolveReport a = penalty_solve(prog, cfg, x0);
  const SolveReport b = penalty_solve(prog, cfg, x0);
  REQUIRE(a.iterations.size() == b.iterations.size());
  for (std::size_t k = 0; k < a.iterations.size(); ++k) CHECK(a.iterations[k].x == b.iterations[k].x);
  CHECK(a.stop == b.stop);
}

TEST_CASE("rho cap stops the loop") {
  PenaltyConfig cfg;
  cfg.rho_cap = 1.0;
  cfg.outer_rel_tol = 0.0;
  const SolveReport r = penalty_solve(example_4_1(), cfg, vec1(0.0));
  CHECK(r.stop == StopReason::kRhoCap);
  CHECK(r.iterations.back().rho * cfg.sigma > cfg.rho_cap);
  CHECK(r.iterations.size() == 4);
}

TEST_CASE("config validation") {
  const DCProgram prog = example_4_1();
  PenaltyConfig bad;
  bad.sigma = 1.0;
  CHECK_THROWS_AS(penalty_solve(prog, bad, vec1(0.0)), Error);
  bad = {};
  bad.p = 3;
  CHECK_THROWS_AS(penalty_solve(prog, bad, vec1(0.0)), Error);
  bad = {};
  bad.rho0 = 0.0;
  CHECK_THROWS_AS(penalty_solve(prog, bad, vec1(0.0)), Error);
  CHECK_THROWS_AS(penalty_solve(prog, PenaltyConfig{}, vec2(0.0, 0.0)), Error);
  CHECK(default_eta(0, 1.0) == doctest::Approx(1e-3));
  CHECK(default_eta(4, 1.0) == doctest::Approx(1e-7));
}

TEST_CASE("subproblem failure is reported, not thrown") {
  DCProgram prog = halfspace_program();
  prog.zeta0 = NonsmoothConvexFn::l1(1.0);
  PenaltyConfig cfg;
  cfg.p = 1;
  cfg.sca.subsolver.max_iterations = 10;
  const SolveReport r = penalty_solve(prog, cfg, vec2(2.0, 2.0));
  CHECK(r.stop == StopReason::kFailure);
  CHECK(r.message.find("not certified") != std::string::npos);
}
