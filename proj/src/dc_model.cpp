#include "dcopt/dc_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>

namespace dcopt {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kIndexOutOfRange: return "index out of range";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kCombinatorialBlowup: return "combinatorial blowup";
    case ErrorCode::kNotStronglyConvex: return "not strongly convex";
    case ErrorCode::kCertificationFailed: return "certification failed";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kChecksum: return "checksum failure";
    case ErrorCode::kIo: return "io error";
  }
  return "error";
}

namespace {

double largest_eigenvalue(const Mat& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym, Eigen::EigenvaluesOnly);
  return std::max(0.0, solver.eigenvalues().maxCoeff());
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

}  // namespace

// ---------------------------------------------------------------- smooth fns

SmoothConvexFn SmoothConvexFn::affine(Vec slope, double offset) {
  auto s = std::make_shared<const Vec>(std::move(slope));
  SmoothConvexFn f;
  f.value = [s, offset](const Vec& x) { return kernels::parallel::dot(kernels::view(*s), kernels::view(x)) + offset; };
  f.gradient = [s](const Vec&) { return *s; };
  f.lipschitz_grad = 0.0;
  f.is_affine = true;
  return f;
}

SmoothConvexFn SmoothConvexFn::quadratic(Mat p, Vec q, double c) {
  const Mat sym = 0.5 * (p + p.transpose());
  const double lip = 2.0 * largest_eigenvalue(sym);
  auto pp = std::make_shared<const Mat>(sym);
  auto qq = std::make_shared<const Vec>(std::move(q));
  SmoothConvexFn f;
  f.value = [pp, qq, c](const Vec& x) {
    Vec px(x.size());
    kernels::parallel::gemv(*pp, kernels::view(x), kernels::view(px));
    return kernels::parallel::dot(kernels::view(x), kernels::view(px)) +
           kernels::parallel::dot(kernels::view(*qq), kernels::view(x)) + c;
  };
  f.gradient = [pp, qq](const Vec& x) {
    Vec px(x.size());
    kernels::parallel::gemv(*pp, kernels::view(x), kernels::view(px));
    return Vec(2.0 * px + *qq);
  };
  f.lipschitz_grad = lip;
  f.is_affine = lip == 0.0 && sym.isZero(0.0);
  return f;
}

SmoothConvexFn SmoothConvexFn::least_squares(Mat a, Vec b) {
  const double lip = a.rows() <= a.cols() ? 2.0 * largest_eigenvalue(a * a.transpose())
                                          : 2.0 * largest_eigenvalue(a.transpose() * a);
  auto aa = std::make_shared<const Mat>(std::move(a));
  auto bb = std::make_shared<const Vec>(std::move(b));
  SmoothConvexFn f;
  f.value = [aa, bb](const Vec& x) {
    Vec r(aa->rows());
    kernels::parallel::gemv(*aa, kernels::view(x), kernels::view(r));
    r -= *bb;
    return kernels::parallel::dot(kernels::view(r), kernels::view(r));
  };
  f.gradient = [aa, bb](const Vec& x) {
    Vec r(aa->rows());
    kernels::parallel::gemv(*aa, kernels::view(x), kernels::view(r));
    r -= *bb;
    Vec g(aa->cols());
    kernels::parallel::gemv_t(*aa, kernels::view(r), kernels::view(g));
    return Vec(2.0 * g);
  };
  f.lipschitz_grad = lip;
  f.is_affine = false;
  return f;
}

SmoothConvexFn SmoothConvexFn::plus_half_squared_norm() const {
  SmoothConvexFn f;
  auto value_fn = value;
  auto grad_fn = gradient;
  f.value = [value_fn](const Vec& x) { return value_fn(x) + 0.5 * x.squaredNorm(); };
  f.gradient = [grad_fn](const Vec& x) { return Vec(grad_fn(x) + x); };
  f.lipschitz_grad = lipschitz_grad + 1.0;
  f.is_affine = false;
  return f;
}

// ------------------------------------------------------------- nonsmooth fns

NonsmoothConvexFn NonsmoothConvexFn::zero() {
  NonsmoothConvexFn f;
  f.value = [](const Vec&) { return 0.0; };
  f.subgradient = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  f.prox = [](const Vec& x, double) { return x; };
  f.subdifferential = [](const Vec& x) -> SubdiffDescriptor {
    return BoxSubdiff{Vec::Zero(x.size()), Vec::Zero(x.size())};
  };
  f.is_zero = true;
  return f;
}

NonsmoothConvexFn NonsmoothConvexFn::l1(double weight) {
  if (!(weight >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "l1 weight must be nonnegative");
  NonsmoothConvexFn f;
  f.value = [weight](const Vec& x) { return weight * kernels::parallel::l1_norm(kernels::view(x)); };
  f.subgradient = [weight](const Vec& x) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = x[i] > 0 ? weight : (x[i] < 0 ? -weight : 0.0);
    return g;
  };
  f.prox = [weight](const Vec& x, double step) {
    Vec out(x.size());
    kernels::parallel::soft_threshold(kernels::view(x), weight * step, kernels::view(out));
    return out;
  };
  f.subdifferential = [weight](const Vec& x) -> SubdiffDescriptor {
    BoxSubdiff box{Vec(x.size()), Vec(x.size())};
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] > 0) {
        box.lower[i] = box.upper[i] = weight;
      } else if (x[i] < 0) {
        box.lower[i] = box.upper[i] = -weight;
      } else {
        box.lower[i] = -weight;
        box.upper[i] = weight;
      }
    }
    return box;
  };
  f.is_zero = weight == 0.0;
  return f;
}

// ------------------------------------------------------------------- PsiFn

PsiFn::PsiFn(MaxSmoothFn fn) : fn_(std::move(fn)) {
  if (as_max().pieces.empty()) throw Error(ErrorCode::kInvalidArgument, "max function needs at least one piece");
}

PsiFn::PsiFn(SeparableMaxFn fn) : fn_(std::move(fn)) {
  const auto& s = as_separable();
  if (s.pieces.empty()) throw Error(ErrorCode::kInvalidArgument, "separable max needs at least one piece");
  if (s.pieces.size() > 32) throw Error(ErrorCode::kInvalidArgument, "separable max supports at most 32 pieces");
  for (const auto& p : s.pieces) {
    if (p.curvature < 0) throw Error(ErrorCode::kInvalidArgument, "separable piece must be convex");
  }
}

int PsiFn::num_blocks() const { return is_separable() ? as_separable().n : 1; }

int PsiFn::pieces_per_block() const {
  return is_separable() ? static_cast<int>(as_separable().pieces.size())
                        : static_cast<int>(as_max().pieces.size());
}

void PsiFn::check_selection(const Selection& sel) const {
  if (static_cast<int>(sel.size()) != num_blocks())
    throw Error(ErrorCode::kDimensionMismatch, "selection has wrong number of blocks");
  const int j = pieces_per_block();
  for (int s : sel) {
    if (s < 0 || s >= j) throw Error(ErrorCode::kIndexOutOfRange, "piece index out of range");
  }
}

double PsiFn::value(const Vec& x) const {
  if (is_separable()) {
    return kernels::parallel::separable_max_value(kernels::view(x), as_separable().pieces);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : as_max().pieces) best = std::max(best, p.value(x));
  return best;
}

double PsiFn::selected_value(const Vec& x, const Selection& sel) const {
  if (is_separable()) {
    return kernels::parallel::separable_selected_value(kernels::view(x), as_separable().pieces, sel);
  }
  return as_max().pieces.at(static_cast<std::size_t>(sel.at(0))).value(x);
}

Vec PsiFn::selected_gradient(const Vec& x, const Selection& sel) const {
  if (is_separable()) {
    Vec g(x.size());
    kernels::parallel::separable_selected_gradient(kernels::view(x), as_separable().pieces, sel,
                                                   kernels::view(g));
    return g;
  }
  return as_max().pieces.at(static_cast<std::size_t>(sel.at(0))).gradient(x);
}

std::vector<std::vector<int>> PsiFn::active_sets(const Vec& x, double eps) const {
  if (!(eps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be nonnegative");
  if (is_separable()) {
    const auto& s = as_separable();
    std::vector<std::uint32_t> masks(static_cast<std::size_t>(x.size()));
    kernels::parallel::separable_active_masks(kernels::view(x), s.pieces, eps, masks);
    std::vector<std::vector<int>> out(masks.size());
    for (std::size_t k = 0; k < masks.size(); ++k) {
      for (int j = 0; j < static_cast<int>(s.pieces.size()); ++j) {
        if (masks[k] & (1u << j)) out[k].push_back(j);
      }
    }
    return out;
  }
  const auto& pieces = as_max().pieces;
  std::vector<double> vals(pieces.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    vals[j] = pieces[j].value(x);
    top = std::max(top, vals[j]);
  }
  std::vector<int> act;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    if (top <= vals[j] + eps) act.push_back(static_cast<int>(j));
  }
  return {act};
}

double PsiFn::directional_derivative(const Vec& x, const Vec& d, double tol) const {
  if (is_separable()) {
    const auto& s = as_separable();
    double total = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      double top = -std::numeric_limits<double>::infinity();
      for (const auto& p : s.pieces) top = std::max(top, p.value(x[k]));
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& p : s.pieces) {
        if (top <= p.value(x[k]) + tol) best = std::max(best, p.derivative(x[k]) * d[k]);
      }
      total += best;
    }
    return total;
  }
  const auto active = active_sets(x, tol).front();
  double best = -std::numeric_limits<double>::infinity();
  for (int j : active) best = std::max(best, as_max().pieces[static_cast<std::size_t>(j)].gradient(x).dot(d));
  return best;
}

PsiFn PsiFn::plus_half_squared_norm() const {
  if (is_separable()) {
    SeparableMaxFn s = as_separable();
    for (auto& p : s.pieces) p.curvature += 1.0;
    return PsiFn(std::move(s));
  }
  MaxSmoothFn m;
  for (const auto& p : as_max().pieces) m.pieces.push_back(p.plus_half_squared_norm());
  return PsiFn(std::move(m));
}

// --------------------------------------------------------------- ConvexSet

ConvexSet ConvexSet::whole_space() {
  ConvexSet s;
  s.kind = SetKind::kWholeSpace;
  s.project = [](const Vec& x) { return x; };
  s.contains = [](const Vec& x, double) { return x.allFinite(); };
  return s;
}

ConvexSet ConvexSet::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size()) throw Error(ErrorCode::kDimensionMismatch, "box bounds differ in size");
  if ((lower.array() > upper.array()).any()) throw Error(ErrorCode::kInvalidArgument, "empty box");
  ConvexSet s;
  s.kind = SetKind::kBox;
  s.lower = lower;
  s.upper = upper;
  s.project = [lower, upper](const Vec& x) { return Vec(x.cwiseMax(lower).cwiseMin(upper)); };
  s.contains = [lower, upper](const Vec& x, double tol) {
    return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
  };
  return s;
}

ConvexSet ConvexSet::polyhedral(Mat g, Vec h) {
  if (g.rows() != h.size()) throw Error(ErrorCode::kDimensionMismatch, "polyhedron rows differ");
  ConvexSet s;
  s.kind = SetKind::kPolyhedral;
  s.g = g;
  s.h = h;
  s.project = [g, h](const Vec& x0) {
    const Eigen::Index m = g.rows();
    Vec x = x0;
    Mat corr = Mat::Zero(x0.size(), m);
    for (int sweep = 0; sweep < 100000; ++sweep) {
      const Vec start = x;
      for (Eigen::Index i = 0; i < m; ++i) {
        const Vec y = x + corr.col(i);
        const double nrm2 = g.row(i).squaredNorm();
        const double viol = g.row(i).dot(y) - h[i];
        Vec p = y;
        if (viol > 0 && nrm2 > 0) p -= (viol / nrm2) * g.row(i).transpose();
        corr.col(i) = y - p;
        x = p;
      }
      if ((x - start).norm() <= 1e-15 * (1.0 + x.norm())) break;
    }
    return x;
  };
  s.contains = [g, h](const Vec& x, double tol) { return ((g * x - h).array() <= tol).all(); };
  return s;
}

ConvexSet ConvexSet::custom(std::function<Vec(const Vec&)> project,
                            std::function<bool(const Vec&, double)> contains) {
  ConvexSet s;
  s.kind = SetKind::kCustom;
  s.project = std::move(project);
  s.contains = std::move(contains);
  return s;
}

// ------------------------------------------------------------- MultiIndex

std::string to_string(const MultiIndex& index) {
  std::ostringstream os;
  os << "(" << index.j0 + 1;
  for (const auto& sel : index.jj) {
    os << ",";
    if (sel.size() == 1) {
      os << sel[0] + 1;
    } else {
      os << "[";
      for (std::size_t k = 0; k < sel.size(); ++k) os << (k ? " " : "") << sel[k] + 1;
      os << "]";
    }
  }
  os << ")";
  return os.str();
}

ActiveProduct::ActiveProduct(std::vector<int> objective_active,
                             std::vector<std::vector<std::vector<int>>> constraint_active)
    : objective_active_(std::move(objective_active)), constraint_active_(std::move(constraint_active)) {
  cardinality_ = objective_active_.size();
  for (int r = 0; r < static_cast<int>(constraint_active_.size()); ++r) {
    const auto& blocks = constraint_active_[static_cast<std::size_t>(r)];
    for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
      const auto sz = blocks[static_cast<std::size_t>(b)].size();
      cardinality_ = saturating_mul(cardinality_, sz);
      if (sz > 1) free_.push_back({r, b});
    }
  }
}

MultiIndex ActiveProduct::at(std::uint64_t ordinal) const {
  if (ordinal >= cardinality_) throw Error(ErrorCode::kIndexOutOfRange, "active product ordinal");
  MultiIndex out;
  out.jj.resize(constraint_active_.size());
  for (std::size_t r = 0; r < constraint_active_.size(); ++r) {
    const auto& blocks = constraint_active_[r];
    out.jj[r].resize(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) out.jj[r][b] = blocks[b].front();
  }
  std::uint64_t rest = ordinal;
  for (auto it = free_.rbegin(); it != free_.rend(); ++it) {
    const auto& choices = constraint_active_[static_cast<std::size_t>(it->row)][static_cast<std::size_t>(it->block)];
    out.jj[static_cast<std::size_t>(it->row)][static_cast<std::size_t>(it->block)] = choices[rest % choices.size()];
    rest /= choices.size();
  }
  out.j0 = objective_active_.at(static_cast<std::size_t>(rest));
  return out;
}

// -------------------------------------------------------------- operations

void check_dimension(const DCProgram& prog, const Vec& x) {
  if (x.size() != prog.n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected dimension " + std::to_string(prog.n) + ", got " + std::to_string(x.size()));
  }
}

void validate(const DCProgram& prog) {
  if (prog.n <= 0) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  auto check_smooth = [](const SmoothConvexFn& f, const char* name) {
    if (!f.value || !f.gradient) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " is missing an oracle");
    if (f.lipschitz_grad < 0) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " has negative Lipschitz constant");
    if (f.is_affine && f.lipschitz_grad != 0.0)
      throw Error(ErrorCode::kInvalidArgument, std::string(name) + " is affine but has nonzero Lipschitz constant");
  };
  auto check_nonsmooth = [](const NonsmoothConvexFn& f, const char* name) {
    if (!f.value || !f.subgradient) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " is missing an oracle");
  };
  auto check_psi = [&](const PsiFn& psi, const char* name) {
    if (psi.is_separable()) {
      if (psi.as_separable().n != prog.n)
        throw Error(ErrorCode::kDimensionMismatch, std::string(name) + " separable dimension");
    } else {
      for (const auto& p : psi.as_max().pieces) check_smooth(p, name);
    }
  };
  check_smooth(prog.phi0, "phi0");
  check_nonsmooth(prog.zeta0, "zeta0");
  check_psi(prog.psi0, "psi0");
  for (const auto& row : prog.constraints) {
    check_smooth(row.phi, "phi_i");
    check_nonsmooth(row.zeta, "zeta_i");
    check_psi(row.psi, "psi_i");
  }
  if (!prog.feasible_set.project || !prog.feasible_set.contains)
    throw Error(ErrorCode::kInvalidArgument, "feasible set is missing an oracle");
}

const PsiFn& psi_at(const DCProgram& prog, int row) {
  if (row == kObjectiveRow) return prog.psi0;
  if (row < 0 || row >= prog.num_constraints()) throw Error(ErrorCode::kIndexOutOfRange, "constraint row " + std::to_string(row));
  return prog.constraints[static_cast<std::size_t>(row)].psi;
}

double constraint_value(const DCProgram& prog, int i, const Vec& x) {
  if (i < 0 || i >= prog.num_constraints()) throw Error(ErrorCode::kIndexOutOfRange, "constraint row " + std::to_string(i));
  check_dimension(prog, x);
  const auto& row = prog.constraints[static_cast<std::size_t>(i)];
  return row.phi.value(x) + row.zeta.value(x) - row.psi.value(x);
}

Vec constraint_values(const DCProgram& prog, const Vec& x) {
  Vec c(prog.num_constraints());
  for (int i = 0; i < prog.num_constraints(); ++i) c[i] = constraint_value(prog, i, x);
  return c;
}

double objective_value(const DCProgram& prog, const Vec& x) {
  check_dimension(prog, x);
  return prog.phi0.value(x) + prog.zeta0.value(x) - prog.psi0.value(x);
}

std::vector<int> eps_active_obj(const DCProgram& prog, const Vec& x, double eps) {
  check_dimension(prog, x);
  return prog.psi0.active_sets(x, eps).front();
}

namespace {

std::vector<std::vector<std::vector<int>>> constraint_actives(const DCProgram& prog, const Vec& x, double eps) {
  std::vector<std::vector<std::vector<int>>> out;
  out.reserve(prog.constraints.size());
  for (const auto& row : prog.constraints) out.push_back(row.psi.active_sets(x, eps));
  return out;
}

void enforce_cap(const ActiveProduct& product, std::uint64_t cap) {
  if (product.cardinality() > cap) {
    throw Error(ErrorCode::kCombinatorialBlowup,
                "eps-active product has " + std::to_string(product.cardinality()) + " tuples, cap is " +
                    std::to_string(cap));
  }
}

}  // namespace

std::uint64_t count_eps_active(const DCProgram& prog, const Vec& x, double eps) {
  check_dimension(prog, x);
  return ActiveProduct({0}, constraint_actives(prog, x, eps)).cardinality();
}

ActiveProduct eps_active_pairs(const DCProgram& prog, const Vec& x, double eps, std::uint64_t cap) {
  check_dimension(prog, x);
  ActiveProduct product(eps_active_obj(prog, x, eps), constraint_actives(prog, x, eps));
  enforce_cap(product, cap);
  return product;
}

ActiveProduct eps_active_constraints(const DCProgram& prog, const Vec& x, double eps, std::uint64_t cap) {
  check_dimension(prog, x);
  ActiveProduct product({0}, constraint_actives(prog, x, eps));
  enforce_cap(product, cap);
  return product;
}

ConstraintPartition classify_constraints(const DCProgram& prog, const Vec& x, double tol) {
  if (!(tol >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be nonnegative");
  ConstraintPartition part;
  for (int i = 0; i < prog.num_constraints(); ++i) {
    const double c = constraint_value(prog, i, x);
    if (std::abs(c) <= tol * (1.0 + std::abs(c))) {
      part.active.push_back(i);
    } else if (c > 0) {
      part.violated.push_back(i);
    } else {
      part.inactive.push_back(i);
    }
  }
  return part;
}

double psi_directional_derivative(const DCProgram& prog, int row, const Vec& x, const Vec& d, double tol) {
  check_dimension(prog, x);
  check_dimension(prog, d);
  return psi_at(prog, row).directional_derivative(x, d, tol);
}

DCProgram normalize_l0(DCProgram prog) {
  if (prog.phi0.lipschitz_grad > 0.0) return prog;
  prog.phi0 = prog.phi0.plus_half_squared_norm();
  prog.phi0.lipschitz_grad = 1.0;
  prog.psi0 = prog.psi0.plus_half_squared_norm();
  return prog;
}

}  // namespace dcopt
