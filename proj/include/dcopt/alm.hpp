#pragma once

// Augmented Lagrangian method with the multiplier update
//   lambda^{k+1} = [lambda^k + rho_k c(x^k)]_+,
//   rho_{k+1}    = max{sigma rho_k, ||lambda^{k+1}||^{1+alpha}},
// and the auxiliary multiplier estimates built from the AL majorant.

#include <functional>
#include <vector>

#include "dcopt/penalty.hpp"

namespace dcopt {

/// How x^{k,j0,jj} is obtained from the AL majorant at x^k.
enum class AuxMode {
  /// Repeat x <- argmin Q~(.; x, lambda^k, j0, jj) from x^k until it stops
  /// moving, then measure the residual against Q~(.; x^k, ...).
  kPairRestricted,
  /// One certified minimization of Q~(.; x^k, lambda^k, j0, jj).
  kAnchored,
};

const char* to_string(AuxMode mode);
AuxMode parse_aux_mode(const std::string& name);

/// 10 / rho.
double default_gamma(int k, double rho);

struct ALConfig {
  double eps = 0.01;
  double rho0 = 0.1;
  double sigma = 2.0;
  double alpha = 1.05;
  /// Empty means zero.
  Vec lambda0;
  EtaSchedule eta = default_eta;
  double outer_rel_tol = 1e-5;
  int max_outer = 200;
  double rho_cap = 1e12;
  SCAConfig sca;

  bool aux_multipliers = false;
  AuxMode aux_mode = AuxMode::kPairRestricted;
  EtaSchedule gamma = default_gamma;

  void validate(int num_constraints) const;
};

struct AuxEntry {
  MultiIndex index;
  Vec x;
  Vec lambda;
  /// F~_rho(x^{k,j0,jj}) with lambda^k.
  double merit = 0.0;
  /// Bound on dist(0, dQ~(x^{k,j0,jj}; x^k, lambda^k, j0, jj)).
  double residual = 0.0;
  bool within_gamma = false;
  int iterations = 0;
  bool converged = false;
};

struct AuxTable {
  double gamma = 0.0;
  std::vector<AuxEntry> entries;
  /// Entry with the smallest merit; the first one on ties.
  int selected = -1;
};

struct ALReport : SolveReport {
  /// One table per outer iteration when aux_multipliers is set.
  std::vector<AuxTable> aux;
};

/// Componentwise [lambda + rho c]_+.
Vec multiplier_update(const Vec& lambda, double rho, const Vec& c);

/// max{sigma rho, ||lambda_next||^{1+alpha}}.
double next_rho(double rho, double sigma, double alpha, const Vec& lambda_next);

AuxTable auxiliary_multipliers(const DCProgram& prog, double rho, const Vec& lambda, const Vec& x,
                               const std::vector<MultiIndex>& pairs, double gamma,
                               AuxMode mode = AuxMode::kPairRestricted);

/// Fixed point of x <- argmin_X Q(.; x, index) started at x0.
struct PairRestrictedResult {
  Vec x;
  int iterations = 0;
  bool converged = false;
};

PairRestrictedResult pair_restricted_solve(const DCProgram& prog, double rho, const MeritMode& mode, const Vec& x0,
                                           const MultiIndex& index, double tol = 1e-13, int max_iterations = 100000);

ALReport al_solve(const DCProgram& prog, const ALConfig& cfg, const Vec& x0);

}  // namespace dcopt
