#include "dcopt/penalty.hpp"

#include <cmath>
#include <limits>

#include "dcopt/diagnostics.hpp"

namespace dcopt {

double default_eta(int k, double /*rho*/) { return std::pow(10.0, -k - 3); }

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kRelativeChange: return "relative-change";
    case StopReason::kUnconstrained: return "unconstrained";
    case StopReason::kMaxOuter: return "max-outer";
    case StopReason::kRhoCap: return "rho-cap";
    case StopReason::kFailure: return "failure";
  }
  return "failure";
}

void PenaltyConfig::validate() const {
  if (!(eps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be >= 0");
  if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw Error(ErrorCode::kInvalidArgument, "rho0 must be positive");
  if (!(sigma > 1.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must exceed 1");
  if (p != 1 && p != 2) throw Error(ErrorCode::kInvalidArgument, "p must be 1 or 2");
  if (!(outer_rel_tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "outer_rel_tol must be >= 0");
  if (max_outer < 1) throw Error(ErrorCode::kInvalidArgument, "max_outer must be >= 1");
  if (!eta) throw Error(ErrorCode::kInvalidArgument, "eta schedule missing");
}

SolveReport penalty_solve(const DCProgram& prog, const PenaltyConfig& cfg, const Vec& x0) {
  cfg.validate();
  check_dimension(prog, x0);
  SolveReport report;
  report.stop = StopReason::kMaxOuter;
  Vec x = x0;
  double rho = cfg.rho0;
  const PenaltyMode mode{cfg.p};

  for (int k = 0; k < cfg.max_outer; ++k) {
    SCAConfig sca = cfg.sca;
    sca.eps = cfg.eps;
    sca.eta = cfg.eta(k, rho);
    SCAResult inner;
    try {
      inner = sca_solve(prog, rho, mode, x, sca);
    } catch (const Error& e) {
      report.stop = StopReason::kFailure;
      report.message = "outer iteration " + std::to_string(k) + ": " + e.what();
      break;
    }

    OuterIteration it;
    it.k = k;
    it.rho = rho;
    it.x = inner.x_final;
    it.objective = objective_value(prog, it.x);
    it.merit = inner.merit_final;
    it.violation = feasibility_violation(prog, it.x);
    it.rel_change = k == 0 ? std::numeric_limits<double>::quiet_NaN() : relative_change(x, it.x).value;
    it.eta = sca.eta;
    it.sca_iterations = inner.outer_iterations;
    it.subsolves = inner.total_subsolves;
    it.sca_terminated = inner.terminated;
    report.total_subsolves += it.subsolves;
    report.total_sca_iterations += it.sca_iterations;
    x = it.x;
    const double rel = it.rel_change;
    report.iterations.push_back(std::move(it));

    if (prog.num_constraints() == 0) {
      report.stop = StopReason::kUnconstrained;
      break;
    }
    if (k > 0 && rel <= cfg.outer_rel_tol) {
      report.stop = StopReason::kRelativeChange;
      break;
    }
    if (cfg.sigma * rho > cfg.rho_cap) {
      report.stop = StopReason::kRhoCap;
      break;
    }
    rho *= cfg.sigma;
  }
  report.x_final = x;
  report.objective = objective_value(prog, x);
  report.violation = feasibility_violation(prog, x);
  return report;
}

}  // namespace dcopt
