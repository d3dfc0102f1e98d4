#include "dcopt/majorants.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dcopt {

namespace {

double pos(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

// ------------------------------------------------------------------ Hinge

double Hinge::value(double g) const {
  switch (kind) {
    case Kind::kPenaltyLinear: return rho * pos(g);
    case Kind::kPenaltySquared: return rho * pos(g) * pos(g);
    case Kind::kAugmented: {
      const double t = pos(lambda + rho * g);
      return (t * t - lambda * lambda) / (2.0 * rho);
    }
  }
  return 0.0;
}

double Hinge::derivative(double g) const {
  switch (kind) {
    case Kind::kPenaltyLinear: return g > 0.0 ? rho : 0.0;
    case Kind::kPenaltySquared: return 2.0 * rho * pos(g);
    case Kind::kAugmented: return pos(lambda + rho * g);
  }
  return 0.0;
}

std::pair<double, double> Hinge::subdifferential(double g) const {
  if (kind == Kind::kPenaltyLinear && g == 0.0) return {0.0, rho};
  const double d = derivative(g);
  return {d, d};
}

double Hinge::conjugate(double mu) const {
  switch (kind) {
    case Kind::kPenaltyLinear: return 0.0;
    case Kind::kPenaltySquared: return mu * mu / (4.0 * rho);
    case Kind::kAugmented: return (mu - lambda) * (mu - lambda) / (2.0 * rho);
  }
  return 0.0;
}

double Hinge::conjugate_derivative(double mu) const {
  switch (kind) {
    case Kind::kPenaltyLinear: return 0.0;
    case Kind::kPenaltySquared: return mu / (2.0 * rho);
    case Kind::kAugmented: return (mu - lambda) / rho;
  }
  return 0.0;
}

void check_mode(const DCProgram& prog, double rho, const MeritMode& mode) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::kInvalidArgument, "rho must be positive and finite");
  if (const auto* pm = std::get_if<PenaltyMode>(&mode)) {
    if (pm->p != 1 && pm->p != 2) throw Error(ErrorCode::kInvalidArgument, "penalty exponent must be 1 or 2");
  } else {
    const auto& lambda = std::get<AlMode>(mode).lambda;
    if (lambda.size() != prog.num_constraints())
      throw Error(ErrorCode::kDimensionMismatch, "multiplier vector has wrong size");
    if ((lambda.array() < 0.0).any() || !lambda.allFinite())
      throw Error(ErrorCode::kInvalidArgument, "multipliers must be nonnegative");
  }
}

std::vector<Hinge> make_hinges(double rho, const MeritMode& mode, int num_constraints) {
  std::vector<Hinge> hinges(static_cast<std::size_t>(num_constraints));
  for (int i = 0; i < num_constraints; ++i) {
    Hinge& h = hinges[static_cast<std::size_t>(i)];
    h.rho = rho;
    if (const auto* pm = std::get_if<PenaltyMode>(&mode)) {
      h.kind = pm->p == 1 ? Hinge::Kind::kPenaltyLinear : Hinge::Kind::kPenaltySquared;
    } else {
      h.kind = Hinge::Kind::kAugmented;
      h.lambda = std::get<AlMode>(mode).lambda[i];
    }
  }
  return hinges;
}

// ---------------------------------------------------------- merit values

double penalty_value(const DCProgram& prog, double rho, int p, const Vec& x) {
  return merit_value(prog, rho, PenaltyMode{p}, x);
}

double al_value(const DCProgram& prog, double rho, const Vec& lambda, const Vec& x) {
  return merit_value(prog, rho, AlMode{lambda}, x);
}

double merit_value(const DCProgram& prog, double rho, const MeritMode& mode, const Vec& x) {
  check_mode(prog, rho, mode);
  const auto hinges = make_hinges(rho, mode, prog.num_constraints());
  double total = objective_value(prog, x);
  for (int i = 0; i < prog.num_constraints(); ++i)
    total += hinges[static_cast<std::size_t>(i)].value(constraint_value(prog, i, x));
  return total;
}

double selected_merit_value(const DCProgram& prog, double rho, const MeritMode& mode,
                            const MultiIndex& index, const Vec& x) {
  check_mode(prog, rho, mode);
  check_dimension(prog, x);
  const auto hinges = make_hinges(rho, mode, prog.num_constraints());
  double total = prog.phi0.value(x) + prog.zeta0.value(x) - prog.psi0.selected_value(x, {index.j0});
  for (int i = 0; i < prog.num_constraints(); ++i) {
    const auto& row = prog.constraints[static_cast<std::size_t>(i)];
    const double g = row.phi.value(x) + row.zeta.value(x) -
                     row.psi.selected_value(x, index.jj[static_cast<std::size_t>(i)]);
    total += hinges[static_cast<std::size_t>(i)].value(g);
  }
  return total;
}

// ------------------------------------------------------------- majorant

IsoQuadratic linearize_difference(const SmoothConvexFn& phi, const PsiFn& psi, const Selection& sel,
                                  const Vec& anchor) {
  psi.check_selection(sel);
  IsoQuadratic q;
  q.constant = phi.value(anchor) - psi.selected_value(anchor, sel);
  q.linear = phi.gradient(anchor) - psi.selected_gradient(anchor, sel);
  q.curvature = phi.is_affine ? 0.0 : phi.lipschitz_grad;
  return q;
}

MajorantInstance::MajorantInstance(const DCProgram& prog, double rho, MeritMode mode, Vec anchor,
                                   MultiIndex index)
    : rho_(rho), mode_(std::move(mode)), anchor_(std::move(anchor)), index_(std::move(index)),
      zeta0_(prog.zeta0), set_(prog.feasible_set) {
  check_mode(prog, rho_, mode_);
  check_dimension(prog, anchor_);
  if (!(prog.l0() > 0.0))
    throw Error(ErrorCode::kNotStronglyConvex, "majorant needs L0 > 0; normalize the program first");
  if (static_cast<int>(index_.jj.size()) != prog.num_constraints())
    throw Error(ErrorCode::kDimensionMismatch, "multi-index has wrong number of constraint entries");
  if (!set_.contains(anchor_, 1e-9 * (1.0 + anchor_.norm())))
    throw Error(ErrorCode::kInvalidArgument, "anchor is not in the feasible set");

  objective_ = linearize_difference(prog.phi0, prog.psi0, {index_.j0}, anchor_);
  parts_.reserve(prog.constraints.size());
  zetas_.reserve(prog.constraints.size());
  for (int i = 0; i < prog.num_constraints(); ++i) {
    const auto& row = prog.constraints[static_cast<std::size_t>(i)];
    parts_.push_back(linearize_difference(row.phi, row.psi, index_.jj[static_cast<std::size_t>(i)], anchor_));
    zetas_.push_back(row.zeta);
  }
  hinges_ = make_hinges(rho_, mode_, prog.num_constraints());
}

double MajorantInstance::inner_value(int i, const Vec& x) const {
  const Vec d = x - anchor_;
  const auto k = static_cast<std::size_t>(i);
  return parts_[k].value(d) + zetas_[k].value(x);
}

std::pair<double, double> MajorantInstance::value_and_scale(const Vec& x) const {
  const Vec d = x - anchor_;
  const double q0 = objective_.value(d);
  const double z0 = zeta0_.value(x);
  double total = q0 + z0;
  double scale = std::abs(objective_.constant) + std::abs(objective_.linear.dot(d)) +
                 0.5 * objective_.curvature * d.squaredNorm() + std::abs(z0);
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const double g = parts_[i].value(d) + zetas_[i].value(x);
    const double h = hinges_[i].value(g);
    total += h;
    scale += std::abs(h) + std::abs(hinges_[i].derivative(g)) *
                               (std::abs(parts_[i].constant) + std::abs(parts_[i].linear.dot(d)) +
                                0.5 * parts_[i].curvature * d.squaredNorm());
  }
  return {total, scale};
}

double MajorantInstance::value(const Vec& x) const { return value_and_scale(x).first; }

Vec MajorantInstance::subgradient(const Vec& x) const {
  const Vec d = x - anchor_;
  Vec g = objective_.gradient(d) + zeta0_.subgradient(x);
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const double inner = parts_[i].value(d) + zetas_[i].value(x);
    const double w = hinges_[i].derivative(inner);
    if (w != 0.0) g += w * (parts_[i].gradient(d) + zetas_[i].subgradient(x));
  }
  return g;
}

}  // namespace dcopt
