#pragma once

// Penalty function F_rho, augmented Lagrangian F~_rho, and their strongly
// convex majorants built at an anchor point for one choice of max pieces.

#include <limits>
#include <variant>
#include <vector>

#include "dcopt/dc_model.hpp"

namespace dcopt {

struct PenaltyMode {
  int p = 2;
};

struct AlMode {
  Vec lambda;
};

using MeritMode = std::variant<PenaltyMode, AlMode>;

/// Outer function applied to each constraint value:
///   penalty p=1:  rho [g]_+
///   penalty p=2:  rho [g]_+^2
///   AL:           ([lambda + rho g]_+^2 - lambda^2) / (2 rho)
/// All are convex and nondecreasing in g; `conjugate` is the Fenchel
/// conjugate on its domain [0, dual_upper()].
struct Hinge {
  enum class Kind { kPenaltyLinear, kPenaltySquared, kAugmented };

  Kind kind = Kind::kPenaltySquared;
  double rho = 1.0;
  double lambda = 0.0;

  double value(double g) const;
  /// Derivative, taking the 0-side element at the kink of the p=1 hinge.
  double derivative(double g) const;
  /// Interval of subgradients at g.
  std::pair<double, double> subdifferential(double g) const;
  bool smooth() const { return kind != Kind::kPenaltyLinear; }

  double dual_upper() const {
    return kind == Kind::kPenaltyLinear ? rho : std::numeric_limits<double>::infinity();
  }
  double conjugate(double mu) const;
  double conjugate_derivative(double mu) const;
};

std::vector<Hinge> make_hinges(double rho, const MeritMode& mode, int num_constraints);

void check_mode(const DCProgram& prog, double rho, const MeritMode& mode);

/// F(x) + rho * sum_i [c_i(x)]_+^p.
double penalty_value(const DCProgram& prog, double rho, int p, const Vec& x);

/// F(x) + (1/(2 rho)) sum_i ([lambda_i + rho c_i(x)]_+^2 - lambda_i^2).
double al_value(const DCProgram& prog, double rho, const Vec& lambda, const Vec& x);

/// penalty_value or al_value depending on the mode.
double merit_value(const DCProgram& prog, double rho, const MeritMode& mode, const Vec& x);

/// constant + linear'(x - anchor) + curvature/2 ||x - anchor||^2.
struct IsoQuadratic {
  double constant = 0.0;
  Vec linear;
  double curvature = 0.0;

  double value(const Vec& d) const { return constant + linear.dot(d) + 0.5 * curvature * d.squaredNorm(); }
  Vec gradient(const Vec& d) const { return linear + curvature * d; }
};

/// Q_rho(x; anchor, j0, jj) in penalty mode or Q~_rho(x; anchor, lambda, j0, jj)
/// in AL mode:
///
///   Q(x) = q0(x) + zeta0(x) + sum_i H_i(q_i(x) + zeta_i(x)),
///
/// where q0 = phi^_0 - l_{psi_{0,j0}} and q_i = phi^_i - l_{psi_{i,j_i}} are
/// isotropic quadratics fixed at the anchor. Strongly convex with modulus L0.
class MajorantInstance {
 public:
  MajorantInstance(const DCProgram& prog, double rho, MeritMode mode, Vec anchor, MultiIndex index);

  int dimension() const { return static_cast<int>(anchor_.size()); }
  int num_constraints() const { return static_cast<int>(parts_.size()); }
  double rho() const { return rho_; }
  double l0() const { return objective_.curvature; }
  const MeritMode& mode() const { return mode_; }
  const Vec& anchor() const { return anchor_; }
  const MultiIndex& index() const { return index_; }

  const IsoQuadratic& objective_part() const { return objective_; }
  const IsoQuadratic& constraint_part(int i) const { return parts_[static_cast<std::size_t>(i)]; }
  const Hinge& hinge(int i) const { return hinges_[static_cast<std::size_t>(i)]; }
  const NonsmoothConvexFn& zeta0() const { return zeta0_; }
  const NonsmoothConvexFn& zeta(int i) const { return zetas_[static_cast<std::size_t>(i)]; }
  const ConvexSet& feasible_set() const { return set_; }

  /// q_i(x) + zeta_i(x): the argument of hinge i.
  double inner_value(int i, const Vec& x) const;

  double value(const Vec& x) const;
  /// Value together with the sum of absolute values of its terms.
  std::pair<double, double> value_and_scale(const Vec& x) const;

  /// One element of the subdifferential (hinge kinks take the 0-side).
  Vec subgradient(const Vec& x) const;

 private:
  double rho_;
  MeritMode mode_;
  Vec anchor_;
  MultiIndex index_;
  IsoQuadratic objective_;
  std::vector<IsoQuadratic> parts_;
  std::vector<Hinge> hinges_;
  NonsmoothConvexFn zeta0_;
  std::vector<NonsmoothConvexFn> zetas_;
  ConvexSet set_;
};

/// phi^(x; anchor) - l_psi(x; anchor) for a smooth phi and the selected psi pieces.
IsoQuadratic linearize_difference(const SmoothConvexFn& phi, const PsiFn& psi, const Selection& sel,
                                  const Vec& anchor);

/// Value of the selected-piece merit function F_rho(x, j0, jj): psi
/// replaced by the selected pieces (no majorization).
double selected_merit_value(const DCProgram& prog, double rho, const MeritMode& mode,
                            const MultiIndex& index, const Vec& x);

}  // namespace dcopt
