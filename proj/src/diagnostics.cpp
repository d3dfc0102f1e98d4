#include "dcopt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace dcopt {

double feasibility_violation(const DCProgram& prog, const Vec& x) {
  double worst = 0.0;
  for (int i = 0; i < prog.num_constraints(); ++i) worst = std::max(worst, constraint_value(prog, i, x));
  return worst;
}

RelativeChange relative_change(const Vec& x_prev, const Vec& x_next) {
  if (x_prev.size() != x_next.size()) throw Error(ErrorCode::kDimensionMismatch, "relative_change: sizes differ");
  const double diff = (x_next - x_prev).norm();
  const double denom = x_next.norm();
  if (denom == 0.0) return {diff, true};
  return {diff / denom, false};
}

SubdiffDescriptor describe_subdifferential(const NonsmoothConvexFn& zeta, const Vec& x) {
  if (zeta.has_subdifferential()) return zeta.subdifferential(x);
  if (zeta.is_zero) return BoxSubdiff{Vec::Zero(x.size()), Vec::Zero(x.size())};
  throw Error(ErrorCode::kUnsupported, "zeta has no subdifferential descriptor");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Euclidean projection onto {z >= 0, sum z = total}.
Vec project_simplex(const Vec& v, double total) {
  if (total <= 0.0) return Vec::Zero(v.size());
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - total) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

// Projection onto {z >= 0, lo <= sum z <= hi}.
Vec project_capped(const Vec& v, double lo, double hi) {
  Vec c = v.cwiseMax(0.0);
  const double s = c.sum();
  if (s > hi) return project_simplex(v, hi);
  if (s < lo) return project_simplex(v, lo);
  return c;
}

struct Layout {
  int n = 0;
  const Vec* a = nullptr;
  // zeta0
  bool d0_vertex = false;
  Vec l0, u0;
  Mat v0;
  // terms
  const std::vector<InclusionTerm>* terms = nullptr;
  std::vector<bool> vertex;
  std::vector<int> offset;
  std::vector<int> width;
  // normal cone bounds
  Vec wl, wu;
  int size = 0;
};

Layout make_layout(const Vec& a, const SubdiffDescriptor& d0, const std::vector<InclusionTerm>& terms,
                   const ConvexSet& set, const Vec& y) {
  Layout lay;
  lay.n = static_cast<int>(a.size());
  lay.a = &a;
  lay.terms = &terms;
  int pos = 0;
  if (const auto* box = std::get_if<BoxSubdiff>(&d0)) {
    lay.l0 = box->lower;
    lay.u0 = box->upper;
  } else {
    lay.d0_vertex = true;
    lay.v0 = std::get<VertexSubdiff>(d0).vertices;
    lay.l0 = Vec::Zero(lay.n);
    lay.u0 = Vec::Zero(lay.n);
    pos += static_cast<int>(lay.v0.cols());
  }
  if (lay.l0.size() != lay.n || lay.u0.size() != lay.n || (lay.d0_vertex && lay.v0.rows() != lay.n))
    throw Error(ErrorCode::kDimensionMismatch, "zeta0 descriptor dimension");
  for (const auto& t : terms) {
    if (t.b.size() != lay.n) throw Error(ErrorCode::kDimensionMismatch, "inclusion term dimension");
    if (!(t.lo >= 0.0) || !(t.hi >= t.lo)) throw Error(ErrorCode::kInvalidArgument, "inclusion bounds need 0 <= lo <= hi");
    const bool vert = std::holds_alternative<VertexSubdiff>(t.desc);
    lay.vertex.push_back(vert);
    lay.offset.push_back(pos);
    int w = 1;
    if (vert) {
      const Mat& vm = std::get<VertexSubdiff>(t.desc).vertices;
      if (vm.rows() != lay.n || vm.cols() == 0) throw Error(ErrorCode::kDimensionMismatch, "vertex descriptor dimension");
      w = static_cast<int>(vm.cols());
    } else {
      const auto& box = std::get<BoxSubdiff>(t.desc);
      if (box.lower.size() != lay.n || box.upper.size() != lay.n)
        throw Error(ErrorCode::kDimensionMismatch, "box descriptor dimension");
    }
    lay.width.push_back(w);
    pos += w;
  }
  lay.size = pos;

  lay.wl = Vec::Zero(lay.n);
  lay.wu = Vec::Zero(lay.n);
  if (set.kind == SetKind::kBox) {
    for (int j = 0; j < lay.n; ++j) {
      if (y[j] <= set.lower[j] + 1e-10 * (1.0 + std::abs(set.lower[j]))) lay.wl[j] = -kInf;
      if (y[j] >= set.upper[j] - 1e-10 * (1.0 + std::abs(set.upper[j]))) lay.wu[j] = kInf;
    }
  } else if (set.kind != SetKind::kWholeSpace) {
    throw Error(ErrorCode::kUnsupported, "normal cone only available for whole-space or box X");
  }
  return lay;
}

double term_lambda(const Layout& lay, std::size_t i, const Vec& z) {
  const int off = lay.offset[i];
  return lay.vertex[i] ? z.segment(off, lay.width[i]).sum() : z[off];
}

// p(z), L(z), U(z) of the clamp formulation.
void affine_parts(const Layout& lay, const Vec& z, Vec& p, Vec& lower, Vec& upper) {
  p = *lay.a;
  lower = lay.l0 + lay.wl;
  upper = lay.u0 + lay.wu;
  if (lay.d0_vertex) p += lay.v0 * z.head(lay.v0.cols());
  for (std::size_t i = 0; i < lay.terms->size(); ++i) {
    const auto& t = (*lay.terms)[i];
    const double lam = term_lambda(lay, i, z);
    p += lam * t.b;
    if (lay.vertex[i]) {
      p += std::get<VertexSubdiff>(t.desc).vertices * z.segment(lay.offset[i], lay.width[i]);
    } else {
      const auto& box = std::get<BoxSubdiff>(t.desc);
      lower += lam * box.lower;
      upper += lam * box.upper;
    }
  }
}

// r = p + clamp(-p, L, U), split into its positive and negative sides.
double residual_parts(const Layout& lay, const Vec& z, Vec& rp, Vec& rn) {
  Vec p, lower, upper;
  affine_parts(lay, z, p, lower, upper);
  rp = (p + lower).cwiseMax(0.0);
  rn = (p + upper).cwiseMin(0.0);
  return 0.5 * (rp + rn).squaredNorm();
}

Vec gradient(const Layout& lay, const Vec& rp, const Vec& rn) {
  const Vec r = rp + rn;
  Vec g(lay.size);
  if (lay.d0_vertex) g.head(lay.v0.cols()) = lay.v0.transpose() * r;
  for (std::size_t i = 0; i < lay.terms->size(); ++i) {
    const auto& t = (*lay.terms)[i];
    const int off = lay.offset[i];
    if (lay.vertex[i]) {
      g.segment(off, lay.width[i]) =
          (std::get<VertexSubdiff>(t.desc).vertices.transpose() * r).array() + r.dot(t.b);
    } else {
      const auto& box = std::get<BoxSubdiff>(t.desc);
      g[off] = r.dot(t.b) + rp.dot(box.lower) + rn.dot(box.upper);
    }
  }
  return g;
}

Vec project(const Layout& lay, const Vec& z) {
  Vec out(lay.size);
  if (lay.d0_vertex) out.head(lay.v0.cols()) = project_simplex(z.head(lay.v0.cols()), 1.0);
  for (std::size_t i = 0; i < lay.terms->size(); ++i) {
    const auto& t = (*lay.terms)[i];
    const int off = lay.offset[i];
    if (lay.vertex[i]) {
      out.segment(off, lay.width[i]) = project_capped(z.segment(off, lay.width[i]), t.lo, t.hi);
    } else {
      out[off] = std::clamp(z[off], t.lo, t.hi);
    }
  }
  return out;
}

Vec initial_point(const Layout& lay) {
  Vec z = Vec::Zero(lay.size);
  if (lay.d0_vertex) z.head(lay.v0.cols()).setConstant(1.0 / static_cast<double>(lay.v0.cols()));
  return project(lay, z);
}

InclusionResult witnesses(const Layout& lay, const Vec& z) {
  InclusionResult out;
  const auto count = lay.terms->size();
  out.lambda.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) out.lambda[static_cast<Eigen::Index>(i)] = term_lambda(lay, i, z);

  Vec p, lower, upper;
  affine_parts(lay, z, p, lower, upper);
  // Finite part of the bounds: the zeta boxes without the normal cone.
  Vec fin_lo = lay.l0;
  Vec fin_hi = lay.u0;
  for (std::size_t i = 0; i < count; ++i) {
    if (lay.vertex[i]) continue;
    const auto& box = std::get<BoxSubdiff>((*lay.terms)[i].desc);
    fin_lo += out.lambda[static_cast<Eigen::Index>(i)] * box.lower;
    fin_hi += out.lambda[static_cast<Eigen::Index>(i)] * box.upper;
  }

  Vec tau = Vec::Zero(lay.n);
  out.w = Vec::Zero(lay.n);
  for (int j = 0; j < lay.n; ++j) {
    const double v = std::clamp(-p[j], lower[j], upper[j]);
    const double vf = std::clamp(v, fin_lo[j], fin_hi[j]);
    out.w[j] = v - vf;
    const double width = fin_hi[j] - fin_lo[j];
    tau[j] = width > 0.0 ? (vf - fin_lo[j]) / width : 0.0;
  }
  if (lay.d0_vertex) {
    out.v0 = lay.v0 * z.head(lay.v0.cols());
  } else {
    out.v0 = lay.l0 + tau.cwiseProduct(lay.u0 - lay.l0);
  }
  out.element = *lay.a + out.v0 + out.w;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& t = (*lay.terms)[i];
    const double lam = out.lambda[static_cast<Eigen::Index>(i)];
    Vec vi;
    if (lay.vertex[i]) {
      const Mat& vm = std::get<VertexSubdiff>(t.desc).vertices;
      const Vec omega = z.segment(lay.offset[i], lay.width[i]);
      vi = lam > 0.0 ? Vec(vm * omega / lam) : Vec(vm.col(0));
    } else {
      const auto& box = std::get<BoxSubdiff>(t.desc);
      vi = box.lower + tau.cwiseProduct(box.upper - box.lower);
    }
    out.element += lam * (t.b + vi);
    out.v.push_back(std::move(vi));
  }
  out.residual = out.element.norm();
  return out;
}

}  // namespace

InclusionResult min_norm_inclusion(const Vec& a, const SubdiffDescriptor& d0, const std::vector<InclusionTerm>& terms,
                                   const ConvexSet& set, const Vec& y, int max_iterations) {
  const Layout lay = make_layout(a, d0, terms, set, y);
  Vec z = initial_point(lay);
  int it = 0;
  if (lay.size > 0) {
    Vec rp, rn;
    Vec y_pt = z;
    double t = 1.0;
    double lip = 1.0;
    double fz = residual_parts(lay, z, rp, rn);
    for (; it < max_iterations && fz > 0.0; ++it) {
      const double fy = residual_parts(lay, y_pt, rp, rn);
      const Vec g = gradient(lay, rp, rn);
      Vec z_next;
      double f_next = 0.0;
      for (int bt = 0; bt < 100; ++bt) {
        z_next = project(lay, y_pt - g / lip);
        f_next = residual_parts(lay, z_next, rp, rn);
        const Vec step = z_next - y_pt;
        if (f_next <= fy + g.dot(step) + 0.5 * lip * step.squaredNorm() + 1e-15 * fy) break;
        lip *= 2.0;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      if (f_next > fz) {
        // Restart momentum from the better point.
        t = 1.0;
        y_pt = z;
        continue;
      }
      y_pt = z_next + ((t - 1.0) / t_next) * (z_next - z);
      y_pt = project(lay, y_pt);
      t = t_next;
      z = std::move(z_next);
      fz = f_next;
    }
  }
  InclusionResult out = witnesses(lay, z);
  out.iterations = it;
  return out;
}

KKTResidual kkt_residual(const DCProgram& prog, const Vec& x, const MultiIndex& index, double classify_tol,
                         int max_iterations) {
  check_dimension(prog, x);
  prog.psi0.check_selection({index.j0});
  if (static_cast<int>(index.jj.size()) != prog.num_constraints())
    throw Error(ErrorCode::kDimensionMismatch, "multi-index has wrong number of constraint entries");

  const Vec a = prog.phi0.gradient(x) - prog.psi0.selected_gradient(x, {index.j0});
  const SubdiffDescriptor d0 = describe_subdifferential(prog.zeta0, x);
  const ConstraintPartition part = classify_constraints(prog, x, classify_tol);

  std::vector<InclusionTerm> terms;
  for (int i : part.active) {
    const auto& row = prog.constraints[static_cast<std::size_t>(i)];
    const auto& sel = index.jj[static_cast<std::size_t>(i)];
    row.psi.check_selection(sel);
    terms.push_back({row.phi.gradient(x) - row.psi.selected_gradient(x, sel), describe_subdifferential(row.zeta, x),
                     0.0, kInf});
  }

  KKTResidual out;
  out.index = index;
  out.inclusion = min_norm_inclusion(a, d0, terms, prog.feasible_set, x, max_iterations);
  out.lambda = Vec::Zero(prog.num_constraints());
  for (std::size_t k = 0; k < part.active.size(); ++k)
    out.lambda[part.active[k]] = out.inclusion.lambda[static_cast<Eigen::Index>(k)];
  out.stationarity = out.inclusion.residual;
  for (int i = 0; i < prog.num_constraints(); ++i)
    out.complementarity = std::max(out.complementarity, std::abs(out.lambda[i] * constraint_value(prog, i, x)));
  return out;
}

KKTReport kkt_report(const DCProgram& prog, const Vec& x, double tol, double activation_tol) {
  KKTReport report;
  const ActiveProduct pairs = eps_active_pairs(prog, x, activation_tol);
  for (std::uint64_t k = 0; k < pairs.cardinality(); ++k) {
    report.pairs.push_back(kkt_residual(prog, x, pairs.at(k)));
    report.worst_stationarity = std::max(report.worst_stationarity, report.pairs.back().stationarity);
    report.worst_complementarity = std::max(report.worst_complementarity, report.pairs.back().complementarity);
  }
  report.violation = feasibility_violation(prog, x);
  report.kkt_residual_ok =
      report.worst_stationarity <= tol && report.worst_complementarity <= tol && report.violation <= tol;
  return report;
}

}  // namespace dcopt
