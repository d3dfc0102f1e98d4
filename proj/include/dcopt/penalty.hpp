#pragma once

// Penalty method: solve min F_rho approximately by SCA, warm started at the
// previous iterate, then rho <- sigma * rho.

#include <functional>
#include <string>
#include <vector>

#include "dcopt/sca.hpp"

namespace dcopt {

/// eta_k as a function of the outer index and the current penalty parameter.
using EtaSchedule = std::function<double(int k, double rho)>;

/// 10^(-k-3).
double default_eta(int k, double rho);

enum class StopReason { kRelativeChange, kUnconstrained, kMaxOuter, kRhoCap, kFailure };

const char* to_string(StopReason reason);

struct PenaltyConfig {
  double eps = 0.01;
  double rho0 = 0.1;
  double sigma = 2.0;
  int p = 2;
  EtaSchedule eta = default_eta;
  double outer_rel_tol = 1e-5;
  int max_outer = 200;
  double rho_cap = 1e12;
  /// eps and eta are overwritten per outer iteration.
  SCAConfig sca;

  void validate() const;
};

struct OuterIteration {
  int k = 0;
  double rho = 0.0;
  /// lambda^k used in the subproblem (empty for the penalty method).
  Vec lambda;
  /// lambda^{k+1} (empty for the penalty method).
  Vec lambda_next;
  Vec x;
  double objective = 0.0;
  double merit = 0.0;
  double violation = 0.0;
  /// ||x^k - x^{k-1}|| / ||x^k||; NaN at k = 0.
  double rel_change = 0.0;
  double eta = 0.0;
  int sca_iterations = 0;
  int subsolves = 0;
  bool sca_terminated = false;
};

struct SolveReport {
  std::vector<OuterIteration> iterations;
  Vec x_final;
  double objective = 0.0;
  double violation = 0.0;
  StopReason stop = StopReason::kMaxOuter;
  std::string message;
  int total_subsolves = 0;
  int total_sca_iterations = 0;
};

SolveReport penalty_solve(const DCProgram& prog, const PenaltyConfig& cfg, const Vec& x0);

}  // namespace dcopt
