#include "dcopt/alm.hpp"

#include <cmath>
#include <limits>

#include "dcopt/diagnostics.hpp"

namespace dcopt {

const char* to_string(AuxMode mode) {
  return mode == AuxMode::kAnchored ? "anchored" : "pair-restricted";
}

AuxMode parse_aux_mode(const std::string& name) {
  if (name == "pair-restricted") return AuxMode::kPairRestricted;
  if (name == "anchored") return AuxMode::kAnchored;
  throw Error(ErrorCode::kInvalidArgument, "unknown auxiliary multiplier mode '" + name + "'");
}

double default_gamma(int /*k*/, double rho) { return 10.0 / rho; }

void ALConfig::validate(int num_constraints) const {
  if (!(eps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be >= 0");
  if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw Error(ErrorCode::kInvalidArgument, "rho0 must be positive");
  if (!(sigma > 1.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must exceed 1");
  if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be positive");
  if (lambda0.size() != 0) {
    if (lambda0.size() != num_constraints) throw Error(ErrorCode::kDimensionMismatch, "lambda0 has wrong size");
    if ((lambda0.array() < 0.0).any()) throw Error(ErrorCode::kInvalidArgument, "lambda0 must be nonnegative");
  }
  if (!(outer_rel_tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "outer_rel_tol must be >= 0");
  if (max_outer < 1) throw Error(ErrorCode::kInvalidArgument, "max_outer must be >= 1");
  if (!eta || !gamma) throw Error(ErrorCode::kInvalidArgument, "schedule missing");
}

Vec multiplier_update(const Vec& lambda, double rho, const Vec& c) {
  if (lambda.size() != c.size()) throw Error(ErrorCode::kDimensionMismatch, "multiplier_update: sizes differ");
  return (lambda + rho * c).cwiseMax(0.0);
}

double next_rho(double rho, double sigma, double alpha, const Vec& lambda_next) {
  return std::max(sigma * rho, std::pow(lambda_next.norm(), 1.0 + alpha));
}

PairRestrictedResult pair_restricted_solve(const DCProgram& prog, double rho, const MeritMode& mode, const Vec& x0,
                                           const MultiIndex& index, double tol, int max_iterations) {
  PairRestrictedResult out;
  out.x = x0;
  const double scale = x0.norm();
  double prev_step = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int it = 0; it < max_iterations; ++it) {
    const MajorantInstance m(prog, rho, mode, out.x, index);
    const SubsolveResult sub = solve_certified(m, out.x, 1e-15);
    const double step = (sub.x - out.x).norm();
    out.x = sub.x;
    out.iterations = it + 1;
    if (step <= tol * std::max(out.x.norm(), scale) || step == 0.0) {
      out.converged = true;
      break;
    }
    // Steps that stop shrinking have reached the subsolver's resolution.
    stalled = step >= 0.5 * prev_step ? stalled + 1 : 0;
    if (stalled >= 5 && step <= 1e3 * tol * std::max(out.x.norm(), scale)) {
      out.converged = true;
      break;
    }
    prev_step = step;
  }
  return out;
}

namespace {

// dist(0, dQ~(y; anchor, lambda, index)) via the inclusion solver.
double majorant_residual(const DCProgram& prog, const MajorantInstance& m, const Vec& y) {
  const Vec d = y - m.anchor();
  Vec a = m.objective_part().gradient(d);
  std::vector<InclusionTerm> terms;
  for (int i = 0; i < m.num_constraints(); ++i) {
    const double h = m.hinge(i).derivative(m.inner_value(i, y));
    a += h * m.constraint_part(i).gradient(d);
    terms.push_back({Vec::Zero(y.size()), describe_subdifferential(m.zeta(i), y), h, h});
  }
  return min_norm_inclusion(a, describe_subdifferential(prog.zeta0, y), terms, prog.feasible_set, y).residual;
}

}  // namespace

AuxTable auxiliary_multipliers(const DCProgram& prog, double rho, const Vec& lambda, const Vec& x,
                               const std::vector<MultiIndex>& pairs, double gamma, AuxMode mode) {
  const AlMode al{lambda};
  check_mode(prog, rho, al);
  AuxTable table;
  table.gamma = gamma;
  for (const auto& index : pairs) {
    const MajorantInstance m(prog, rho, al, x, index);
    AuxEntry e;
    e.index = index;
    if (mode == AuxMode::kPairRestricted) {
      const PairRestrictedResult pr = pair_restricted_solve(prog, rho, al, x, index);
      e.x = pr.x;
      e.iterations = pr.iterations;
      e.converged = pr.converged;
    } else {
      const SubsolveResult sub = solve_certified(m, x, gamma);
      e.x = sub.x;
      e.iterations = sub.cert.iterations;
      e.converged = sub.cert.certified;
    }
    e.lambda.resize(prog.num_constraints());
    for (int i = 0; i < prog.num_constraints(); ++i)
      e.lambda[i] = std::max(0.0, lambda[i] + rho * m.inner_value(i, e.x));
    e.merit = al_value(prog, rho, lambda, e.x);
    e.residual = majorant_residual(prog, m, e.x);
    e.within_gamma = e.residual <= gamma;
    if (table.selected < 0 || e.merit < table.entries[static_cast<std::size_t>(table.selected)].merit)
      table.selected = static_cast<int>(table.entries.size());
    table.entries.push_back(std::move(e));
  }
  return table;
}

ALReport al_solve(const DCProgram& prog, const ALConfig& cfg, const Vec& x0) {
  cfg.validate(prog.num_constraints());
  check_dimension(prog, x0);
  ALReport report;
  report.stop = StopReason::kMaxOuter;
  Vec x = x0;
  double rho = cfg.rho0;
  Vec lambda = cfg.lambda0.size() ? cfg.lambda0 : Vec::Zero(prog.num_constraints());

  for (int k = 0; k < cfg.max_outer; ++k) {
    SCAConfig sca = cfg.sca;
    sca.eps = cfg.eps;
    sca.eta = cfg.eta(k, rho);
    SCAResult inner;
    try {
      inner = sca_solve(prog, rho, AlMode{lambda}, x, sca);
      if (cfg.aux_multipliers) {
        const ActiveProduct product = eps_active_pairs(prog, inner.x_final, cfg.eps, sca.pair_cap);
        std::vector<MultiIndex> pairs;
        for (std::uint64_t q = 0; q < product.cardinality(); ++q) pairs.push_back(product.at(q));
        report.aux.push_back(
            auxiliary_multipliers(prog, rho, lambda, inner.x_final, pairs, cfg.gamma(k, rho), cfg.aux_mode));
      }
    } catch (const Error& e) {
      report.stop = StopReason::kFailure;
      report.message = "outer iteration " + std::to_string(k) + ": " + e.what();
      break;
    }

    OuterIteration it;
    it.k = k;
    it.rho = rho;
    it.lambda = lambda;
    it.x = inner.x_final;
    it.objective = objective_value(prog, it.x);
    it.merit = inner.merit_final;
    it.violation = feasibility_violation(prog, it.x);
    it.rel_change = k == 0 ? std::numeric_limits<double>::quiet_NaN() : relative_change(x, it.x).value;
    it.eta = sca.eta;
    it.sca_iterations = inner.outer_iterations;
    it.subsolves = inner.total_subsolves;
    it.sca_terminated = inner.terminated;
    it.lambda_next = multiplier_update(lambda, rho, constraint_values(prog, it.x));
    report.total_subsolves += it.subsolves;
    report.total_sca_iterations += it.sca_iterations;
    x = it.x;
    lambda = it.lambda_next;
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
    const double rho_next = next_rho(rho, cfg.sigma, cfg.alpha, lambda);
    if (!(rho_next <= cfg.rho_cap)) {
      report.stop = StopReason::kRhoCap;
      break;
    }
    rho = rho_next;
  }
  report.x_final = x;
  report.objective = objective_value(prog, x);
  report.violation = feasibility_violation(prog, x);
  return report;
}

}  // namespace dcopt
