#pragma once

// Feasibility, the relative-change stopping metric, and KKT residuals.

#include <vector>

#include "dcopt/dc_model.hpp"

namespace dcopt {

/// max_i [c_i(x)]_+ (0 when there are no constraints).
double feasibility_violation(const DCProgram& prog, const Vec& x);

struct RelativeChange {
  double value = 0.0;
  /// x_next == 0: value is the absolute norm ||x_next - x_prev||.
  bool zero_denominator = false;
};

RelativeChange relative_change(const Vec& x_prev, const Vec& x_next);

/// One multiplied term of an inclusion: lambda * (b + D) with lambda in [lo, hi].
struct InclusionTerm {
  Vec b;
  SubdiffDescriptor desc;
  double lo = 0.0;
  double hi = 0.0;
};

struct InclusionResult {
  Vec lambda;
  double residual = 0.0;
  /// Witnesses: v0 in D0, v[i] in D_i, w in N_X(y), and
  /// element = a + v0 + sum_i lambda_i (b_i + v[i]) + w.
  Vec v0;
  std::vector<Vec> v;
  Vec w;
  Vec element;
  int iterations = 0;
};

/// min || a + v0 + sum_i lambda_i (b_i + v_i) + w ||
/// over v0 in D0, v_i in D_i, lambda_i in [lo_i, hi_i], w in N_X(y).
/// X must be whole-space or a box. Solved by accelerated projected gradient.
InclusionResult min_norm_inclusion(const Vec& a, const SubdiffDescriptor& d0, const std::vector<InclusionTerm>& terms,
                                   const ConvexSet& set, const Vec& y, int max_iterations = 500);

/// Subdifferential polytope of zeta at x; zero functions give {0}.
/// Throws kUnsupported when no descriptor is available.
SubdiffDescriptor describe_subdifferential(const NonsmoothConvexFn& zeta, const Vec& x);

struct KKTResidual {
  MultiIndex index;
  Vec lambda;
  double stationarity = 0.0;
  /// max_i |lambda_i c_i(x)|.
  double complementarity = 0.0;
  InclusionResult inclusion;
};

/// Multipliers for the inclusion
///   0 in grad phi0 + d zeta0 - grad psi_{0,j0}
///        + sum_{i in I_=} lambda_i (grad phi_i + d zeta_i - grad psi_{i,j_i}) + N_X(x),
/// with lambda_i = 0 outside I_=.
KKTResidual kkt_residual(const DCProgram& prog, const Vec& x, const MultiIndex& index,
                         double classify_tol = kDefaultClassifyTol, int max_iterations = 500);

struct KKTReport {
  std::vector<KKTResidual> pairs;
  double worst_stationarity = 0.0;
  double worst_complementarity = 0.0;
  double violation = 0.0;
  /// Every pair has stationarity and complementarity within tol and x is feasible within tol.
  bool kkt_residual_ok = false;
};

/// kkt_residual over every pair of the 0-active product at x.
KKTReport kkt_report(const DCProgram& prog, const Vec& x, double tol = 1e-8,
                     double activation_tol = kDefaultActivationTol);

}  // namespace dcopt
