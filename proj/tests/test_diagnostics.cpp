#include <doctest.h>

#include "dcopt/diagnostics.hpp"
#include "dcopt/problems.hpp"
#include "helpers.hpp"

using namespace dcopt;
using namespace dcopt::testing;

namespace {

// Rebuilds the inclusion element from the witnesses.
void check_witnesses(const KKTResidual& r, const DCProgram& prog, const Vec& x) {
  const InclusionResult& inc = r.inclusion;
  Vec e = prog.phi0.gradient(x) - prog.psi0.as_max().pieces[static_cast<std::size_t>(r.index.j0)].gradient(x) + inc.v0 +
          inc.w;
  // Witnesses v are listed for the active constraints only.
  const std::vector<int> active = classify_constraints(prog, x).active;
  REQUIRE(inc.v.size() == active.size());
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto i = static_cast<std::size_t>(active[k]);
    const auto& row = prog.constraints[i];
    const int j = r.index.jj[i].at(0);
    const Vec b = row.phi.gradient(x) - row.psi.as_max().pieces[static_cast<std::size_t>(j)].gradient(x);
    e += r.lambda[active[k]] * (b + inc.v[k]);
  }
  CHECK((e - inc.element).norm() <= 1e-12 * (1.0 + e.norm()));
  CHECK(inc.element.norm() == doctest::Approx(r.stationarity).epsilon(1e-12));
}

}  // namespace

TEST_CASE("feasibility_violation") {
  const DCProgram prog = example_4_1();
  CHECK(feasibility_violation(prog, vec1(0.0)) == 0.0);
  CHECK(feasibility_violation(prog, vec1(1.0)) == doctest::Approx(1.0));
  CHECK(feasibility_violation(prog, vec1(-2.0)) == 0.0);
  CHECK(feasibility_violation(convex_program(vec2(1.0, 1.0)), vec2(5.0, 5.0)) == 0.0);
}

TEST_CASE("relative_change") {
  const RelativeChange a = relative_change(vec2(1.0, 0.0), vec2(2.0, 0.0));
  CHECK(a.value == doctest::Approx(0.5));
  CHECK_FALSE(a.zero_denominator);
  const RelativeChange z = relative_change(vec2(3.0, 4.0), vec2(0.0, 0.0));
  CHECK(z.zero_denominator);
  CHECK(z.value == doctest::Approx(5.0));
  CHECK(relative_change(vec2(1.0, 1.0), vec2(1.0, 1.0)).value == 0.0);
}

TEST_CASE("KKT residual of the worked example at 0") {
  const DCProgram prog = example_4_1();
  const Vec x = vec1(0.0);
  // Multiplier ranges solving 0 in [-1,1] - grad psi0_j0 + lambda (2 - grad psi1_j1).
  const std::vector<std::pair<double, double>> ranges{{5.0 / 3.0, 7.0 / 3.0}, {5.0, 7.0}, {0.0, 2.0 / 3.0}, {0.0, 2.0}};
  const KKTReport rep = kkt_report(prog, x);
  REQUIRE(rep.pairs.size() == 4);
  CHECK(rep.kkt_residual_ok);
  CHECK(rep.violation == 0.0);
  for (std::size_t q = 0; q < 4; ++q) {
    const KKTResidual& r = rep.pairs[q];
    CAPTURE(to_string(r.index));
    CHECK(r.stationarity <= 1e-8);
    CHECK(r.lambda[0] >= ranges[q].first - 1e-8);
    CHECK(r.lambda[0] <= ranges[q].second + 1e-8);
    CHECK(r.complementarity <= 1e-12);
    check_witnesses(r, prog, x);
  }
  CHECK(to_string(rep.pairs[1].index) == "(1,2)");
}

TEST_CASE("KKT residual away from stationarity") {
  const DCProgram prog = example_4_1();
  // x = -1: the constraint is inactive so lambda = 0, and
  // 0 in d|x| - grad psi0 = -1 - 1 fails by 2 for the single active piece (x).
  const KKTResidual r = kkt_residual(prog, vec1(-1.0), pair(1, 0));
  CHECK(r.lambda[0] == 0.0);
  CHECK(r.stationarity == doctest::Approx(2.0).epsilon(1e-9));
  check_witnesses(r, prog, vec1(-1.0));
  const KKTReport rep = kkt_report(prog, vec1(-1.0));
  CHECK_FALSE(rep.kkt_residual_ok);
  CHECK(rep.pairs.size() == 1);
  // Violated points fail the report regardless of stationarity.
  CHECK(kkt_report(prog, vec1(1.0)).violation == doctest::Approx(1.0));
  CHECK_FALSE(kkt_report(prog, vec1(1.0)).kkt_residual_ok);
}

TEST_CASE("normal cone of a box") {
  DCProgram prog = convex_program(vec2(3.0, 0.5));
  prog.feasible_set = ConvexSet::box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0));
  const KKTResidual at = kkt_residual(prog, vec2(2.0, 0.5), MultiIndex{0, {}});
  CHECK(at.stationarity <= 1e-10);
  CHECK(at.inclusion.w[0] == doctest::Approx(1.0).epsilon(1e-8));
  const KKTResidual inside = kkt_residual(prog, vec2(1.0, 0.5), MultiIndex{0, {}});
  CHECK(inside.stationarity == doctest::Approx(2.0).epsilon(1e-9));
  // Halfspace constraint x1 <= 0 active at (0, 1) with multiplier 1.
  const KKTResidual hs = kkt_residual(halfspace_program(), vec2(0.0, 1.0), MultiIndex{0, {{0}}});
  CHECK(hs.stationarity <= 1e-10);
  CHECK(hs.lambda[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("subdifferential descriptors and unsupported sets") {
  const auto d = describe_subdifferential(NonsmoothConvexFn::l1(2.0), vec2(0.0, -3.0));
  REQUIRE(std::holds_alternative<BoxSubdiff>(d));
  const BoxSubdiff& box = std::get<BoxSubdiff>(d);
  CHECK(box.lower[0] == -2.0);
  CHECK(box.upper[0] == 2.0);
  CHECK(box.lower[1] == -2.0);
  CHECK(box.upper[1] == -2.0);
  const auto z = describe_subdifferential(NonsmoothConvexFn::zero(), vec2(1.0, 1.0));
  REQUIRE(std::holds_alternative<BoxSubdiff>(z));
  CHECK(std::get<BoxSubdiff>(z).upper.norm() == 0.0);

  Mat g(1, 2);
  g << 1.0, 1.0;
  const ConvexSet poly = ConvexSet::polyhedral(g, vec1(1.0));
  try {
    min_norm_inclusion(vec2(1.0, 0.0), z, {}, poly, vec2(0.0, 0.0));
    FAIL("expected unsupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupported);
  }
}
