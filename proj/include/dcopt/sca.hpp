#pragma once

// Successive convex approximation for one penalty or AL subproblem.
//
// At x^t every pair (j0, jj) of the eps-active product is tried in
// lexicographic order. A pair whose certified majorant minimizer decreases
// the merit function by more than eta - delta_t^2/(2 L0) is accepted and the
// blocked set is cleared; the loop stops once every pair at x^t is blocked.

#include <cstdint>
#include <functional>
#include <vector>

#include "dcopt/majorants.hpp"
#include "dcopt/subsolver.hpp"

namespace dcopt {

/// delta_t = 10^(-t-1).
double default_delta(int t);

struct SCAConfig {
  double eps = 0.01;
  double eta = 1e-3;
  std::function<double(int)> delta = default_delta;
  /// Accepted moves before giving up.
  int max_outer = 20000;
  std::uint64_t pair_cap = kDefaultPairCap;
  SubsolveOptions subsolver;
  /// Solve the pairs of one sweep concurrently; adjudication stays sequential.
  bool parallel_pairs = false;
};

struct CertifiedPair {
  MultiIndex index;
  Vec x;
  double merit = 0.0;
  SubsolveCertificate cert;
};

struct SCAMove {
  MultiIndex index;
  double merit_before = 0.0;
  double merit_after = 0.0;
  double delta = 0.0;
};

struct SCAResult {
  Vec x_final;
  double merit_final = 0.0;
  /// Rejected pairs at x_final; covers the whole eps-active product when terminated.
  std::vector<CertifiedPair> certified_pairs;
  int outer_iterations = 0;
  int total_subsolves = 0;
  bool terminated = false;
  std::vector<SCAMove> moves;
};

/// Throws kCombinatorialBlowup past cfg.pair_cap and kCertificationFailed when
/// a subsolve cannot be certified.
SCAResult sca_solve(const DCProgram& prog, double rho, const MeritMode& mode, const Vec& x0, const SCAConfig& cfg);

struct PairMargin {
  MultiIndex index;
  /// min_X Q (certified lower bound) + eta - F_rho(x).
  double margin = 0.0;
  /// Smallest Q(y) + eta - F_rho(x) over the random samples.
  double sample_margin = 0.0;
};

struct InexactReport {
  std::vector<PairMargin> pairs;
  double worst_margin = 0.0;
  bool violated = false;
};

/// Checks F_rho(x) <= Q(y; x, j0, jj) + eta for all y in X and all eps-active
/// pairs, using a tight certified subsolve per pair plus n_samples random points.
InexactReport verify_inexact_condition(const DCProgram& prog, double rho, const MeritMode& mode, const Vec& x,
                                       double eps, double eta, int n_samples, std::uint64_t seed = 0,
                                       double tol = 0.0);

}  // namespace dcopt
