#pragma once

// Oracle representation of DC programs
//
//   min  phi0(x) + zeta0(x) - psi0(x)
//   s.t. phi_i(x) + zeta_i(x) - psi_i(x) <= 0,  i = 0..I-1,   x in X,
//
// with phi smooth convex, zeta convex (possibly nonsmooth) and each psi a
// pointwise max of smooth convex pieces. A psi may also be a coordinate-wise
// separable sum of maxes; its piece selection is then one index per
// coordinate and is never expanded into a flat list of pieces.
//
// Row and piece indices are 0-based throughout.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dcopt/error.hpp"
#include "dcopt/kernels.hpp"

namespace dcopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using kernels::ScalarPiece;

struct SmoothConvexFn {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  /// Lipschitz constant of the gradient; 0 for affine functions.
  double lipschitz_grad = 0.0;
  bool is_affine = false;

  static SmoothConvexFn affine(Vec slope, double offset);
  static SmoothConvexFn constant(int n, double offset) { return affine(Vec::Zero(n), offset); }
  /// x'Px + q'x + c with P symmetric PSD; L = 2 * lambda_max(P).
  static SmoothConvexFn quadratic(Mat p, Vec q, double c);
  /// Least squares ||Ax - b||^2; L = 2 * lambda_max(A'A).
  static SmoothConvexFn least_squares(Mat a, Vec b);

  /// Returns this function plus ||x||^2 / 2.
  SmoothConvexFn plus_half_squared_norm() const;
};

struct BoxSubdiff {
  Vec lower;
  Vec upper;
};

/// Convex hull of the columns.
struct VertexSubdiff {
  Mat vertices;
};

using SubdiffDescriptor = std::variant<BoxSubdiff, VertexSubdiff>;

struct NonsmoothConvexFn {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> subgradient;
  /// argmin_z f(z) + ||z - x||^2 / (2 step); empty when not available.
  std::function<Vec(const Vec&, double)> prox;
  /// Polytope describing the whole subdifferential at x; empty when not available.
  std::function<SubdiffDescriptor(const Vec&)> subdifferential;
  bool is_zero = false;

  bool has_prox() const { return static_cast<bool>(prox); }
  bool has_subdifferential() const { return static_cast<bool>(subdifferential); }

  static NonsmoothConvexFn zero();
  /// weight * ||x||_1.
  static NonsmoothConvexFn l1(double weight = 1.0);
};

struct MaxSmoothFn {
  std::vector<SmoothConvexFn> pieces;
};

/// sum_k max_j pieces[j](x_k).
struct SeparableMaxFn {
  int n = 0;
  std::vector<ScalarPiece> pieces;
};

/// Piece choice for one psi: one entry for a plain max, one per coordinate
/// for a separable max.
using Selection = std::vector<int>;

class PsiFn {
 public:
  PsiFn() = default;
  PsiFn(MaxSmoothFn fn);  // NOLINT(google-explicit-constructor)
  PsiFn(SeparableMaxFn fn);  // NOLINT(google-explicit-constructor)

  bool is_separable() const { return std::holds_alternative<SeparableMaxFn>(fn_); }
  const MaxSmoothFn& as_max() const { return std::get<MaxSmoothFn>(fn_); }
  const SeparableMaxFn& as_separable() const { return std::get<SeparableMaxFn>(fn_); }

  /// Entries of a Selection.
  int num_blocks() const;
  /// Pieces available in every block.
  int pieces_per_block() const;

  double value(const Vec& x) const;
  double selected_value(const Vec& x, const Selection& sel) const;
  Vec selected_gradient(const Vec& x, const Selection& sel) const;

  /// Per block, the pieces j with psi_block(x) <= piece_j(x) + eps.
  std::vector<std::vector<int>> active_sets(const Vec& x, double eps) const;

  /// Danskin: max over pieces active within `tol` of grad' d, summed over blocks.
  double directional_derivative(const Vec& x, const Vec& d, double tol) const;

  /// Same function with ||x||^2/2 added to every piece.
  PsiFn plus_half_squared_norm() const;

  void check_selection(const Selection& sel) const;

 private:
  std::variant<MaxSmoothFn, SeparableMaxFn> fn_ = MaxSmoothFn{};
};

enum class SetKind { kWholeSpace, kBox, kPolyhedral, kCustom };

struct ConvexSet {
  SetKind kind = SetKind::kWholeSpace;
  std::function<Vec(const Vec&)> project;
  std::function<bool(const Vec&, double)> contains;
  /// Box bounds (kind == kBox).
  Vec lower;
  Vec upper;
  /// Polyhedron {x : G x <= h} (kind == kPolyhedral).
  Mat g;
  Vec h;

  static ConvexSet whole_space();
  static ConvexSet box(Vec lower, Vec upper);
  /// Projection by Dykstra's alternating projections onto the halfspaces.
  static ConvexSet polyhedral(Mat g, Vec h);
  static ConvexSet custom(std::function<Vec(const Vec&)> project,
                          std::function<bool(const Vec&, double)> contains);
};

struct ConstraintRow {
  SmoothConvexFn phi;
  NonsmoothConvexFn zeta;
  PsiFn psi;
};

struct DCProgram {
  int n = 0;
  SmoothConvexFn phi0;
  NonsmoothConvexFn zeta0;
  PsiFn psi0;
  std::vector<ConstraintRow> constraints;
  ConvexSet feasible_set = ConvexSet::whole_space();

  int num_constraints() const { return static_cast<int>(constraints.size()); }
  double l0() const { return phi0.lipschitz_grad; }
};

/// Row index used for psi0 where a row index is expected.
inline constexpr int kObjectiveRow = -1;

struct MultiIndex {
  int j0 = 0;
  std::vector<Selection> jj;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;
};

std::string to_string(const MultiIndex& index);

/// Lexicographic enumeration of J_{0,eps}(x) x J_eps(x). Blocks with a single
/// active piece are fixed; only the free positions are enumerated.
class ActiveProduct {
 public:
  ActiveProduct(std::vector<int> objective_active,
                std::vector<std::vector<std::vector<int>>> constraint_active);

  /// Product cardinality, saturated at UINT64_MAX.
  std::uint64_t cardinality() const { return cardinality_; }
  bool empty() const { return cardinality_ == 0; }

  /// The ordinal-th tuple in lexicographic order (j0 slowest, last block fastest).
  MultiIndex at(std::uint64_t ordinal) const;

  const std::vector<int>& objective_active() const { return objective_active_; }
  const std::vector<std::vector<std::vector<int>>>& constraint_active() const {
    return constraint_active_;
  }

 private:
  struct FreeSlot {
    int row;
    int block;
  };
  std::vector<int> objective_active_;
  std::vector<std::vector<std::vector<int>>> constraint_active_;
  std::vector<FreeSlot> free_;
  std::uint64_t cardinality_ = 0;
};

inline constexpr double kDefaultActivationTol = 1e-9;
inline constexpr double kDefaultClassifyTol = 1e-8;
inline constexpr std::uint64_t kDefaultPairCap = 4096;

void check_dimension(const DCProgram& prog, const Vec& x);
/// Validates oracle presence and the L0 / affine invariants.
void validate(const DCProgram& prog);

const PsiFn& psi_at(const DCProgram& prog, int row);

double constraint_value(const DCProgram& prog, int i, const Vec& x);
Vec constraint_values(const DCProgram& prog, const Vec& x);
double objective_value(const DCProgram& prog, const Vec& x);

std::vector<int> eps_active_obj(const DCProgram& prog, const Vec& x, double eps);

/// Cardinality of J_eps(x) without enumerating (saturated).
std::uint64_t count_eps_active(const DCProgram& prog, const Vec& x, double eps);

/// J_{0,eps}(x) x J_eps(x); throws kCombinatorialBlowup past `cap` tuples.
ActiveProduct eps_active_pairs(const DCProgram& prog, const Vec& x, double eps,
                               std::uint64_t cap = kDefaultPairCap);

/// J_eps(x) alone: the j0 component of every tuple is 0.
ActiveProduct eps_active_constraints(const DCProgram& prog, const Vec& x, double eps,
                                     std::uint64_t cap = kDefaultPairCap);

struct ConstraintPartition {
  std::vector<int> violated;  // I_>
  std::vector<int> active;    // I_=
  std::vector<int> inactive;  // I_<
};

/// i is active iff |c_i(x)| <= tol * (1 + |c_i(x)|).
ConstraintPartition classify_constraints(const DCProgram& prog, const Vec& x,
                                         double tol = kDefaultClassifyTol);

double psi_directional_derivative(const DCProgram& prog, int row, const Vec& x, const Vec& d,
                                  double tol = kDefaultActivationTol);

/// Adds ||x||^2/2 to phi0 and every psi0 piece when phi0 is affine (L0 = 0).
DCProgram normalize_l0(DCProgram prog);

}  // namespace dcopt
