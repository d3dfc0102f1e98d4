#include <doctest.h>

#include "dcopt/problems.hpp"
#include "dcopt/subsolver.hpp"
#include "helpers.hpp"

using namespace dcopt;
using namespace dcopt::testing;

namespace {

SubsolveOptions with_backend(SubsolverBackend b) {
  SubsolveOptions o;
  o.backend = b;
  return o;
}

}  // namespace

TEST_CASE("scalar majorant has the closed-form minimizer on every backend") {
  // |x| + x^2/2 - 6x + 0.05 [3x]_+^2, minimized at 5/1.9.
  const DCProgram prog = example_4_1();
  const MajorantInstance m(prog, 0.05, PenaltyMode{2}, vec1(0.0), pair(0, 0));
  const double x_star = 5.0 / 1.9;
  const GridMin grid = grid_minimize([&](const Vec& x) { return m.value(x); }, 1, -10.0, 10.0);
  CHECK(grid.x[0] == doctest::Approx(x_star).epsilon(1e-6));

  for (auto [backend, delta] : std::vector<std::pair<SubsolverBackend, double>>{
           {SubsolverBackend::kDual, 1e-10},
           {SubsolverBackend::kProxGradient, 1e-10},
           {SubsolverBackend::kSubgradient, 5e-2}}) {
    const std::string name = to_string(backend);
    CAPTURE(name);
    const SubsolveResult r = solve_certified(m, vec1(0.0), delta, with_backend(backend));
    CHECK(r.cert.certified);
    CHECK(r.cert.method == backend);
    CHECK(r.cert.gap_bound == doctest::Approx(delta * delta / 2.0));
    // Strong convexity with L0 = 1 turns the gap bound into a distance bound.
    CHECK(std::abs(r.x[0] - x_star) <= delta + 1e-12);
    CHECK(r.value - m.value(vec1(x_star)) <= r.cert.gap_bound + 1e-14);
  }
}

TEST_CASE("auto backend order") {
  const DCProgram prog = example_4_1();
  CHECK(resolve_backend(MajorantInstance(prog, 1.0, PenaltyMode{1}, vec1(0.0), pair(0, 0)), {}) ==
        SubsolverBackend::kDual);
  DCProgram boxed = halfspace_program();
  boxed.zeta0 = NonsmoothConvexFn::l1(0.5);
  const MajorantInstance sub(boxed, 1.0, PenaltyMode{1}, vec2(0.0, 0.0), MultiIndex{0, {{0}}});
  CHECK(resolve_backend(sub, {}) == SubsolverBackend::kSubgradient);
  CHECK_THROWS_AS(resolve_backend(sub, with_backend(SubsolverBackend::kDual)), Error);
  CHECK_THROWS_AS(resolve_backend(sub, with_backend(SubsolverBackend::kProxGradient)), Error);
  try {
    solve_certified(sub, vec2(0.0, 0.0), 1e-3, with_backend(SubsolverBackend::kDual));
    FAIL("expected unsupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupported);
  }
  SubsolveOptions few;
  few.max_dual_constraints = 0;
  const MajorantInstance smooth(halfspace_program(), 1.0, PenaltyMode{2}, vec2(0.0, 0.0), MultiIndex{0, {{0}}});
  CHECK(resolve_backend(smooth, few) == SubsolverBackend::kProxGradient);
}

TEST_CASE("certified minimizers agree with a grid search") {
  Rng rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    const bool box = trial % 2 == 0;
    const DCProgram prog = random_program(rng, 2, 1 + trial % 2, trial % 3 == 0, box);
    Vec anchor = rng.normal_vector(2);
    if (box) anchor = prog.feasible_set.project(anchor);
    const MultiIndex idx = eps_active_pairs(prog, anchor, 0.0).at(0);
    const MeritMode mode = trial % 3 == 1 ? MeritMode{AlMode{Vec::Constant(prog.num_constraints(), 0.5)}}
                                          : MeritMode{PenaltyMode{1 + trial % 2}};
    const MajorantInstance m(prog, 1.0, mode, anchor, idx);
    // The averaged subgradient bound decays like 1/T, so it gets a loose delta.
    const double delta = resolve_backend(m, {}) == SubsolverBackend::kSubgradient ? 1e-1 : 1e-4;
    const SubsolveResult r = solve_certified(m, anchor, delta);
    const double lo = box ? -2.0 : -8.0, hi = box ? 2.0 : 8.0;
    const GridMin grid = grid_minimize([&](const Vec& x) { return m.value(x); }, 2, lo, hi, 201, 8);
    CAPTURE(trial);
    const std::string method = to_string(r.cert.method);
    CAPTURE(method);
    CAPTURE(r.cert.iterations);
    CHECK(r.cert.certified);
    CHECK(r.value - grid.value <= r.cert.suboptimality + 1e-9 * (1.0 + std::abs(grid.value)));
    if (box) CHECK(r.x.cwiseAbs().maxCoeff() <= 2.0);
  }
}

TEST_CASE("minimizer of an unconstrained convex majorant is the target") {
  Rng rng(6);
  const Vec target = vec2(0.7, -1.3);
  const DCProgram prog = convex_program(target);
  for (int i = 0; i < 5; ++i) {
    const Vec anchor = rng.normal_vector(2);
    const MajorantInstance m(prog, 1.0, PenaltyMode{2}, anchor, MultiIndex{0, {}});
    const SubsolveResult r = solve_certified(m, anchor, 1e-10);
    CHECK((r.x - target).norm() <= 1e-9);
  }
  const MajorantInstance at_target(prog, 1.0, PenaltyMode{2}, target, MultiIndex{0, {}});
  CHECK((solve_certified(at_target, target, 1e-12).x - target).norm() <= 1e-12);
}

TEST_CASE("tighter delta gives a tighter certificate") {
  const DCProgram prog = halfspace_program();
  const MajorantInstance m(prog, 2.0, PenaltyMode{2}, vec2(1.0, 1.0), MultiIndex{0, {{0}}});
  double prev = std::numeric_limits<double>::infinity();
  Vec prev_x;
  for (double delta : {1e-1, 1e-3, 1e-5, 1e-7}) {
    const SubsolveResult r = solve_certified(m, vec2(1.0, 1.0), delta);
    CHECK(r.cert.certified);
    CHECK(r.cert.suboptimality <= r.cert.gap_bound);
    CHECK(r.cert.suboptimality <= prev);
    if (prev_x.size() != 0) CHECK((r.x - prev_x).norm() <= 10.0 * delta / 1e-2 + 1e-1);
    prev = r.cert.suboptimality;
    prev_x = r.x;
  }
  // 1/2 (x1 - 1)^2 + 2 x1^2 on x1 > 0: x1 = 1/5.
  CHECK(prev_x[0] == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(prev_x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("argument checks") {
  const DCProgram prog = example_4_1();
  const MajorantInstance m(prog, 1.0, PenaltyMode{2}, vec1(0.0), pair(0, 0));
  CHECK_THROWS_AS(solve_certified(m, vec1(0.0), 0.0), Error);
  CHECK_THROWS_AS(solve_certified(m, vec2(0.0, 0.0), 1e-3), Error);
  CHECK_THROWS_AS(parse_backend("newton"), Error);
  CHECK(parse_backend("prox-gradient") == SubsolverBackend::kProxGradient);
}
