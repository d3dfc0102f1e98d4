#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <filesystem>

#include "dcopt/runner.hpp"
#include "helpers.hpp"

using namespace dcopt;
using namespace dcopt::testing;

namespace {

constexpr const char* kQuadMatrices[] = {"Q", "A1", "A2", "B11", "B12", "B21", "B22"};

double cap_direct(const Vec& x, double s) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) h += std::max({x[i] - s, 0.0, -x[i] - s});
  return h;
}

std::string corrupt(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("parse_instance accepted a bad file");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("quadratic instances") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const InstanceData data = gen_quadratic_dc(6, seed);
    for (const char* name : kQuadMatrices) {
      const Mat& m = data.block(name);
      CHECK((m - m.transpose()).norm() <= 1e-12 * (1.0 + m.norm()));
      const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues();
      CHECK(ev.minCoeff() >= -1e-10);
      CHECK(ev.maxCoeff() <= 20.0 + 1e-9);
    }
    const DCProgram prog = materialize(data);
    CHECK(prog.num_constraints() == 2);
    CHECK(prog.constraints[0].psi.as_max().pieces.size() == 2);
    // phi0 = x'Qx + q'x.
    const Vec x = Vec::LinSpaced(6, -1.0, 1.0);
    CHECK(prog.phi0.value(x) ==
          doctest::Approx(x.dot(data.block("Q") * x) + data.block("q").col(0).dot(x)).epsilon(1e-12));
    CHECK(prog.phi0.lipschitz_grad ==
          doctest::Approx(2.0 * Eigen::SelfAdjointEigenSolver<Mat>(data.block("Q")).eigenvalues().maxCoeff()));
  }
  CHECK(serialize_instance(gen_quadratic_dc(5, 9)) == serialize_instance(gen_quadratic_dc(5, 9)));
  CHECK(serialize_instance(gen_quadratic_dc(5, 9)) != serialize_instance(gen_quadratic_dc(5, 10)));
  CHECK_THROWS_AS(gen_quadratic_dc(1, 1), Error);
}

TEST_CASE("n=2 quadratic instance: PM2 and ALM agree") {
  const InstanceData data = gen_quadratic_dc(2, 2);
  const DCProgram prog = materialize(data);
  const Vec x0 = initial_point(data);
  RunConfig pm2;
  RunConfig alm;
  alm.method = Method::kALM;
  const RunResult a = run_method(prog, pm2, x0);
  const RunResult b = run_method(prog, alm, x0);
  REQUIRE(a.report.stop == StopReason::kRelativeChange);
  REQUIRE(b.report.stop == StopReason::kRelativeChange);
  CHECK(std::abs(a.report.objective - b.report.objective) <= 1e-3 * std::abs(b.report.objective));
  // No nearby feasible grid point does noticeably better than the ALM point.
  const Vec xb = b.report.x_final;
  const auto local = [&](const Vec& y) {
    return feasibility_violation(prog, y) > 0.0 ? std::numeric_limits<double>::infinity() : objective_value(prog, y);
  };
  Vec center = xb;
  const GridMin g = grid_minimize([&](const Vec& d) { return local(center + d); }, 2, -0.05, 0.05, 101, 0);
  CHECK(g.value >= b.report.objective - 1e-3 * (1.0 + std::abs(b.report.objective)));
}

TEST_CASE("sparse recovery instances") {
  const int m = 16, n = 40, k = 4;
  const double s = 0.1;
  const InstanceData data = gen_sparse_recovery(m, n, k, s, 5);
  const Mat& a = data.block("A");
  CHECK((a * a.transpose() - Mat::Identity(m, m)).norm() <= 1e-10);
  const Vec x_star = data.block("x_star").col(0);
  int nnz = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x_star[i] != 0.0) {
      ++nnz;
      CHECK(std::abs(x_star[i]) == 1.0);
    }
  }
  CHECK(nnz == k);
  CHECK(data.param("noise_variance") == kDefaultNoiseVariance);

  const DCProgram prog = materialize(data);
  CHECK(prog.l0() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(constraint_value(prog, 0, x_star)) <= 1e-12);
  CHECK(constraint_value(prog, 0, Vec::Zero(n)) == doctest::Approx(-s * k));
  Rng rng(19);
  const PsiFn cap = sparse_cap(n, s);
  for (int t = 0; t < 100; ++t) {
    const Vec x = 0.3 * rng.normal_vector(n);
    const double direct = x.lpNorm<1>() - cap_direct(x, s) - s * k;
    CHECK(std::abs(constraint_value(prog, 0, x) - direct) <= 1e-12);
    CHECK(std::abs(cap.value(x) - cap_direct(x, s)) <= 1e-12);
  }
  // The initial point solves the l1-ball least squares problem.
  const Vec x0 = initial_point(data);
  CHECK(x0.lpNorm<1>() <= s * k * (1.0 + 1e-9));

  CHECK_THROWS_AS(gen_sparse_recovery(4, 6, 7, 0.1, 1), Error);
  CHECK_THROWS_AS(gen_sparse_recovery(4, 6, 2, 0.0, 1), Error);
  CHECK_THROWS_AS(gen_sparse_recovery(4, 6, 2, 0.1, 1, -1.0), Error);
  const InstanceData quiet = gen_sparse_recovery(m, n, k, s, 5, 0.0);
  CHECK((quiet.block("A") * x_star - quiet.block("b").col(0)).norm() <= 1e-12);
}

TEST_CASE("l1 ball projection") {
  Vec v(4);
  v << 3.0, -1.0, 0.5, 0.0;
  const Vec p = project_l1_ball(v, 2.0);
  CHECK(p.lpNorm<1>() == doctest::Approx(2.0));
  CHECK(p[0] == doctest::Approx(2.0));
  CHECK(p[1] == 0.0);
  CHECK(project_l1_ball(v, 10.0) == v);
  // Optimality: (v - p)'(y - p) <= 0 for feasible y.
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const Vec y = project_l1_ball(rng.normal_vector(4), 2.0);
    CHECK((v - p).dot(y - p) <= 1e-12);
  }
}

TEST_CASE("instance round trip") {
  for (const InstanceData& data : {gen_quadratic_dc(4, 7), gen_sparse_recovery(8, 20, 3, 0.1, 2), example_4_1_data()}) {
    const std::string text = serialize_instance(data);
    const InstanceData back = parse_instance(text);
    CHECK(serialize_instance(back) == text);
    CHECK(back.seed == data.seed);
    CHECK(back.kind == data.kind);
    const DCProgram p1 = materialize(data), p2 = materialize(back);
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      const Vec x = rng.normal_vector(p1.n);
      CHECK(std::abs(objective_value(p1, x) - objective_value(p2, x)) <= 1e-12);
    }
  }
  const auto path = std::filesystem::temp_directory_path() / "dcopt-test-instance.txt";
  const InstanceData data = gen_quadratic_dc(3, 11);
  save_instance(data, path.string());
  CHECK(serialize_instance(load_instance(path.string())) == serialize_instance(data));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_instance("/nonexistent/dcopt/instance.txt"), Error);
}

TEST_CASE("malformed instance files") {
  const std::string text = serialize_instance(gen_quadratic_dc(3, 1));
  // Truncated inside the blocks.
  const std::string cut = text.substr(0, text.find("block Q"));
  try {
    parse_instance(cut);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("missing block 'Q'") != std::string::npos);
  }
  CHECK(parse_error(text.substr(0, text.find("checksum"))) == ErrorCode::kParse);
  CHECK(parse_error(corrupt(text, "version 1", "version 2")) == ErrorCode::kVersionMismatch);
  CHECK(parse_error(corrupt(text, "seed 1", "seed 2")) == ErrorCode::kChecksum);
  CHECK(parse_error(corrupt(text, "kind quadratic-dc", "kind cubic")) == ErrorCode::kParse);
  CHECK(parse_error("hello\n") == ErrorCode::kParse);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
