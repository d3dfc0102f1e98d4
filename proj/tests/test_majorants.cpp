#include <doctest.h>

#include "dcopt/majorants.hpp"
#include "dcopt/problems.hpp"
#include "helpers.hpp"

using namespace dcopt;
using namespace dcopt::testing;

TEST_CASE("penalty_value") {
  const DCProgram prog = example_4_1();
  CHECK(penalty_value(prog, 1.0, 2, vec1(1.0)) == doctest::Approx(-4.0));
  CHECK(penalty_value(prog, 2.0, 1, vec1(1.0)) == doctest::Approx(-3.0));
  for (double x : {-3.0, -1.0, -0.2, 0.0}) {
    CHECK(penalty_value(prog, 7.0, 1, vec1(x)) == objective_value(prog, vec1(x)));
    CHECK(penalty_value(prog, 7.0, 2, vec1(x)) == objective_value(prog, vec1(x)));
  }
}

TEST_CASE("al_value") {
  const DCProgram prog = example_4_1();
  const double rho = 0.1;
  const Vec zero = Vec::Zero(1);
  CHECK(al_value(prog, rho, zero, vec1(5.0 / (9.0 * rho))) == doctest::Approx(-425.0 / (162.0 * rho)));
  CHECK(al_value(prog, rho, zero, vec1(5.0 / rho)) == doctest::Approx(-25.0 / (2.0 * rho)));
  for (double x : {-2.0, -0.5, 0.0}) CHECK(al_value(prog, rho, zero, vec1(x)) == objective_value(prog, vec1(x)));

  // lambda = 0: F + (rho/2) sum [c]_+^2, i.e. the p = 2 penalty with rho/2.
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Vec x = vec1(rng.uniform(-5.0, 5.0));
    const double r = rng.uniform(0.1, 10.0);
    CHECK(al_value(prog, r, zero, x) == doctest::Approx(penalty_value(prog, r / 2.0, 2, x)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(al_value(prog, rho, Vec::Constant(1, -1.0), vec1(0.0)), Error);
}

TEST_CASE("hinge conjugates satisfy Fenchel-Young with equality at the derivative") {
  for (const Hinge h : {Hinge{Hinge::Kind::kPenaltySquared, 2.0, 0.0}, Hinge{Hinge::Kind::kAugmented, 0.5, 1.5},
                        Hinge{Hinge::Kind::kPenaltyLinear, 3.0, 0.0}}) {
    for (double g : {-4.0, -0.3, 0.2, 1.7}) {
      const double mu = h.derivative(g);
      CHECK(h.value(g) + h.conjugate(mu) == doctest::Approx(mu * g).epsilon(1e-12));
      for (double m : {0.0, 0.25, 1.0, 2.5})
        if (m <= h.dual_upper()) CHECK(h.value(g) + h.conjugate(m) >= m * g - 1e-12);
    }
  }
}

TEST_CASE("majorant value by hand") {
  // Anchor 0, lambda 0, pair (1,1), rho 1:
  // |x| + x^2/2 - 6x + (1/2)[3x]_+^2 at x = 0.1.
  const DCProgram prog = example_4_1();
  const MajorantInstance m(prog, 1.0, AlMode{Vec::Zero(1)}, vec1(0.0), pair(0, 0));
  CHECK(m.value(vec1(0.1)) == doctest::Approx(-0.45).epsilon(1e-14));
  const auto brute = [](double x) {
    const double g = 3.0 * x;
    return std::abs(x) + 0.5 * x * x - 6.0 * x + 0.5 * std::max(g, 0.0) * std::max(g, 0.0);
  };
  for (double x : {-1.0, -0.1, 0.0, 0.3, 2.0}) CHECK(m.value(vec1(x)) == doctest::Approx(brute(x)).epsilon(1e-14));
}

TEST_CASE("majorant touches the merit function at the anchor and dominates it") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const bool box = trial % 3 == 0;
    const DCProgram prog = random_program(rng, 2, 2, trial % 2 == 0, box);
    Vec anchor = rng.normal_vector(2);
    if (box) anchor = prog.feasible_set.project(anchor);
    const MultiIndex index = eps_active_pairs(prog, anchor, 0.0).at(0);
    const double rho = rng.uniform(0.1, 5.0);
    const Vec lambda = Vec::Constant(2, rng.uniform(0.0, 2.0));
    for (const MeritMode& mode : {MeritMode{PenaltyMode{1}}, MeritMode{PenaltyMode{2}}, MeritMode{AlMode{lambda}}}) {
      const MajorantInstance m(prog, rho, mode, anchor, index);
      const double f = merit_value(prog, rho, mode, anchor);
      CHECK(std::abs(m.value(anchor) - f) <= 1e-12 * (1.0 + std::abs(f)));
      for (int s = 0; s < 50; ++s) {
        const Vec y = anchor + rng.uniform(0.01, 3.0) * rng.normal_vector(2);
        CHECK(m.value(y) >= merit_value(prog, rho, mode, y) - 1e-10 * (1.0 + std::abs(m.value(y))));
      }
    }
  }
}

TEST_CASE("majorant is L0-strongly convex") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const DCProgram prog = random_program(rng, 3, 2);
    const Vec anchor = rng.normal_vector(3);
    const MajorantInstance m(prog, 2.0, PenaltyMode{trial % 2 + 1}, anchor, eps_active_pairs(prog, anchor, 0.0).at(0));
    for (int s = 0; s < 30; ++s) {
      const Vec x = rng.normal_vector(3), y = rng.normal_vector(3);
      const double t = rng.uniform();
      const double lhs = m.value(t * x + (1 - t) * y);
      const double rhs = t * m.value(x) + (1 - t) * m.value(y) - 0.5 * m.l0() * t * (1 - t) * (x - y).squaredNorm();
      CHECK(lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("majorant subgradient") {
  Rng rng(17);
  SUBCASE("smooth instance matches finite differences") {
    for (int trial = 0; trial < 20; ++trial) {
      DCProgram prog = random_program(rng, 3, 2);
      prog.zeta0 = NonsmoothConvexFn::zero();
      const Vec anchor = rng.normal_vector(3);
      const MajorantInstance m(prog, 1.5, AlMode{Vec::Constant(2, 0.7)}, anchor,
                               eps_active_pairs(prog, anchor, 0.0).at(0));
      const Vec x = rng.normal_vector(3);
      const Vec fd = finite_difference([&](const Vec& y) { return m.value(y); }, x);
      const Vec g = m.subgradient(x);
      CHECK((g - fd).norm() <= 1e-5 * (1.0 + g.norm()));
    }
  }
  SUBCASE("inactive hinges contribute nothing") {
    const DCProgram prog = example_4_1();
    const MajorantInstance m(prog, 3.0, PenaltyMode{1}, vec1(-1.0), pair(1, 0));
    // The constraint part is 3x, negative at x = -0.5.
    const Vec x = vec1(-0.5);
    const Vec expected = m.objective_part().gradient(x - m.anchor()) + vec1(-1.0);
    CHECK(m.subgradient(x)[0] == doctest::Approx(expected[0]));
  }
  SUBCASE("p = 1 at a violated point includes rho times the inner gradient") {
    const DCProgram prog = example_4_1();
    const double rho = 3.0;
    const MajorantInstance m(prog, rho, PenaltyMode{1}, vec1(0.0), pair(0, 0));
    const Vec x = vec1(0.4);
    REQUIRE(m.inner_value(0, x) > 0.0);
    const double h = 1e-7;
    const double right = (m.value(vec1(0.4 + h)) - m.value(x)) / h;
    const double left = (m.value(x) - m.value(vec1(0.4 - h))) / h;
    CHECK(m.subgradient(x)[0] == doctest::Approx(right).epsilon(1e-5));
    CHECK(m.subgradient(x)[0] == doctest::Approx(left).epsilon(1e-5));
    CHECK(m.subgradient(x)[0] - (m.objective_part().gradient(x)[0] + 1.0) == doctest::Approx(rho * 3.0));
  }
}

TEST_CASE("selected merit equals the merit function on the active pair") {
  const DCProgram prog = example_4_1();
  for (double x : {-2.0, -0.3, 0.4, 3.0}) {
    const MultiIndex idx = eps_active_pairs(prog, vec1(x), 0.0).at(0);
    CHECK(selected_merit_value(prog, 0.7, PenaltyMode{2}, idx, vec1(x)) ==
          doctest::Approx(penalty_value(prog, 0.7, 2, vec1(x))));
  }
}
