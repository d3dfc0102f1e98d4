#pragma once

// Small programs and brute-force oracles shared by the unit tests and the
// acceptance binary.

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "dcopt/dc_model.hpp"
#include "dcopt/rng.hpp"

namespace dcopt::testing {

inline MultiIndex pair(int j0, int j1) { return MultiIndex{j0, {{j1}}}; }

inline Vec vec1(double v) { return Vec::Constant(1, v); }

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// A random PSD matrix with eigenvalues in [lo, hi].
inline Mat random_psd(Rng& rng, int n, double lo, double hi) {
  const Mat g = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Mat> qr(g);
  const Mat u = qr.householderQ() * Mat::Identity(n, n);
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = rng.uniform(lo, hi);
  return u * d.asDiagonal() * u.transpose();
}

inline SmoothConvexFn random_quadratic(Rng& rng, int n, double lo, double hi) {
  return SmoothConvexFn::quadratic(random_psd(rng, n, lo, hi), rng.normal_vector(n), rng.normal());
}

/// Random DC program with two-piece psi's. zeta0 is l1 with probability 1/2;
/// otherwise, when nonsmooth_rows is set, the first constraint carries an l1
/// term. X is a box when `box` is set.
inline DCProgram random_program(Rng& rng, int n, int rows, bool nonsmooth_rows = false, bool box = false) {
  DCProgram prog;
  prog.n = n;
  prog.phi0 = random_quadratic(rng, n, 0.5, 3.0);
  const bool l1_objective = rng.uniform() < 0.5;
  prog.zeta0 = l1_objective ? NonsmoothConvexFn::l1(rng.uniform(0.1, 1.0)) : NonsmoothConvexFn::zero();
  prog.psi0 = MaxSmoothFn{{random_quadratic(rng, n, 0.0, 1.0), SmoothConvexFn::affine(rng.normal_vector(n), rng.normal())}};
  for (int i = 0; i < rows; ++i) {
    ConstraintRow row;
    row.phi = random_quadratic(rng, n, 0.0, 2.0);
    row.zeta = (nonsmooth_rows && !l1_objective && i == 0) ? NonsmoothConvexFn::l1(rng.uniform(0.1, 1.0))
                                                             : NonsmoothConvexFn::zero();
    row.psi = MaxSmoothFn{{random_quadratic(rng, n, 0.0, 1.0), random_quadratic(rng, n, 0.0, 1.0)}};
    prog.constraints.push_back(std::move(row));
  }
  if (box) prog.feasible_set = ConvexSet::box(Vec::Constant(n, -2.0), Vec::Constant(n, 2.0));
  return prog;
}

/// min 1/2 ||x - target||^2 + zeta0 with psi0 = 0 and no constraints.
inline DCProgram convex_program(const Vec& target, bool l1 = false) {
  DCProgram prog;
  prog.n = static_cast<int>(target.size());
  prog.phi0 = SmoothConvexFn::quadratic(0.5 * Mat::Identity(prog.n, prog.n), -target, 0.5 * target.squaredNorm());
  prog.zeta0 = l1 ? NonsmoothConvexFn::l1(1.0) : NonsmoothConvexFn::zero();
  prog.psi0 = MaxSmoothFn{{SmoothConvexFn::constant(prog.n, 0.0)}};
  return prog;
}

/// min 1/2 ||x - (1,1)||^2  s.t.  x_1 <= 0,  x in [-2,2]^2.
inline DCProgram halfspace_program() {
  DCProgram prog = convex_program(vec2(1.0, 1.0));
  ConstraintRow row;
  row.phi = SmoothConvexFn::affine(vec2(1.0, 0.0), 0.0);
  row.zeta = NonsmoothConvexFn::zero();
  row.psi = MaxSmoothFn{{SmoothConvexFn::constant(2, 0.0)}};
  prog.constraints.push_back(std::move(row));
  prog.feasible_set = ConvexSet::box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0));
  return prog;
}

struct GridMin {
  Vec x;
  double value = std::numeric_limits<double>::infinity();
};

/// Brute-force minimum over a uniform grid on [lo, hi]^n (n <= 2), followed
/// by `levels` zooms around the best node.
inline GridMin grid_minimize(const std::function<double(const Vec&)>& f, int n, double lo, double hi,
                             int nodes = 401, int levels = 6) {
  GridMin best;
  Vec center = Vec::Constant(n, 0.5 * (lo + hi));
  double half = 0.5 * (hi - lo);
  for (int level = 0; level <= levels; ++level) {
    const double h = 2.0 * half / (nodes - 1);
    Vec x(n);
    if (n == 1) {
      for (int i = 0; i < nodes; ++i) {
        x[0] = center[0] - half + i * h;
        const double v = f(x);
        if (v < best.value) best = {x, v};
      }
    } else {
      for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j) {
          x << center[0] - half + i * h, center[1] - half + j * h;
          const double v = f(x);
          if (v < best.value) best = {x, v};
        }
    }
    center = best.x;
    half = 4.0 * h;
  }
  return best;
}

/// Central difference gradient.
inline Vec finite_difference(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

}  // namespace dcopt::testing
