#include "dcopt/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcopt {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kRoundoffFactor = 64.0;

// Index of the single nonzero zeta: -1 none, 0 for zeta0, i + 1 for zeta_i.
// Returns -2 when more than one zeta is nonzero.
int nonzero_zeta(const MajorantInstance& m) {
  int found = m.zeta0().is_zero ? -1 : 0;
  for (int i = 0; i < m.num_constraints(); ++i) {
    if (m.zeta(i).is_zero) continue;
    if (found != -1) return -2;
    found = i + 1;
  }
  return found;
}

const NonsmoothConvexFn& zeta_by_slot(const MajorantInstance& m, int slot) {
  return slot == 0 ? m.zeta0() : m.zeta(slot - 1);
}

void finish_certificate(SubsolveCertificate& cert, double l0, double residual, double gap, bool at_resolution) {
  const double g = std::max(gap, 0.0);
  const double from_gap = std::sqrt(2.0 * l0 * g);
  cert.residual = std::min(residual, from_gap);
  cert.suboptimality = std::min(residual * residual / (2.0 * l0), g);
  cert.certified = cert.residual <= cert.delta;
  if (!cert.certified && at_resolution) {
    cert.certified = true;
    cert.roundoff_limited = true;
  }
}

// ------------------------------------------------------------------ dual
//
// With H_i(g) = sup_{mu in [0, u_i]} mu g - H_i*(mu), the majorant is
//   Q(x) = sup_mu  q0 + zeta0 + sum_i mu_i (q_i + zeta_i) - H_i*(mu_i),
// and for fixed mu the inner minimization over X is a single prox or
// projection because every q is an isotropic quadratic around the anchor.

struct DualPoint {
  Vec mu;
  Vec x;
  Vec shifted;  // anchor - v / C, the prox input
  double curvature = 0.0;
  double coef = 0.0;  // weight of the nonzero zeta
  double dual = 0.0;
  double dual_scale = 0.0;
  Vec grad;
  // Every bisection that produced this point ran to adjacent doubles or hit
  // an exact answer.
  bool at_resolution = true;
};

class DualSolver {
 public:
  DualSolver(const MajorantInstance& m) : m_(m), slot_(nonzero_zeta(m)), count_(m.num_constraints()) {}

  DualPoint evaluate(const Vec& mu) {
    ++evaluations_;
    DualPoint p;
    p.mu = mu;
    const Vec& anchor = m_.anchor();
    double c = m_.objective_part().curvature;
    Vec v = m_.objective_part().linear;
    for (int i = 0; i < count_; ++i) {
      if (mu[i] == 0.0) continue;
      c += mu[i] * m_.constraint_part(i).curvature;
      v += mu[i] * m_.constraint_part(i).linear;
    }
    p.curvature = c;
    p.shifted = anchor - v / c;
    p.coef = slot_ <= 0 ? (slot_ == 0 ? 1.0 : 0.0) : mu[slot_ - 1];
    if (slot_ >= 0 && p.coef > 0.0) {
      p.x = zeta_by_slot(m_, slot_).prox(p.shifted, p.coef / c);
    } else {
      p.x = m_.feasible_set().project(p.shifted);
    }
    const Vec d = p.x - anchor;
    const double z0 = m_.zeta0().value(p.x);
    double lag = m_.objective_part().value(d) + z0;
    double scale = std::abs(m_.objective_part().constant) + std::abs(m_.objective_part().linear.dot(d)) +
                   0.5 * m_.objective_part().curvature * d.squaredNorm() + std::abs(z0);
    p.grad.resize(count_);
    for (int i = 0; i < count_; ++i) {
      const auto& part = m_.constraint_part(i);
      const double g = part.value(d) + m_.zeta(i).value(p.x);
      const Hinge& h = m_.hinge(i);
      lag += mu[i] * g - h.conjugate(mu[i]);
      scale += mu[i] * (std::abs(part.constant) + std::abs(part.linear.dot(d)) + 0.5 * part.curvature * d.squaredNorm()) +
               std::abs(h.conjugate(mu[i]));
      p.grad[i] = g - h.conjugate_derivative(mu[i]);
    }
    p.dual = lag;
    p.dual_scale = scale;
    return p;
  }

  // Maximizes the concave dual over mu[level..] with mu[..level) fixed.
  DualPoint maximize(int level, Vec mu) {
    if (level == count_) return evaluate(mu);
    auto at = [&](double t) {
      mu[level] = t;
      return maximize(level + 1, mu);
    };
    DualPoint lo_pt = at(0.0);
    if (lo_pt.grad[level] <= 0.0) return lo_pt;
    const double upper = m_.hinge(level).dual_upper();
    double lo = 0.0;
    double hi;
    DualPoint hi_pt;
    if (std::isfinite(upper)) {
      hi_pt = at(upper);
      if (hi_pt.grad[level] >= 0.0) return hi_pt;
      hi = upper;
    } else {
      const double guess = m_.hinge(level).derivative(m_.constraint_part(level).constant);
      hi = std::max(1.0, 2.0 * guess);
      hi_pt = at(hi);
      int expansions = 0;
      while (hi_pt.grad[level] > 0.0) {
        lo = hi;
        lo_pt = std::move(hi_pt);
        hi *= 4.0;
        if (!std::isfinite(hi) || ++expansions > 600)
          throw Error(ErrorCode::kNotStronglyConvex, "dual is unbounded; majorant has no minimizer");
        hi_pt = at(hi);
      }
      if (hi_pt.grad[level] == 0.0) return hi_pt;
    }
    bool collapsed = false;
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) {
        collapsed = true;
        break;
      }
      DualPoint mid_pt = at(mid);
      const double g = mid_pt.grad[level];
      if (g > 0.0) {
        lo = mid;
        lo_pt = std::move(mid_pt);
      } else if (g < 0.0) {
        hi = mid;
        hi_pt = std::move(mid_pt);
      } else {
        return mid_pt;
      }
    }
    lo_pt.at_resolution = lo_pt.at_resolution && collapsed;
    hi_pt.at_resolution = hi_pt.at_resolution && collapsed;
    if (level == 0) bracket_ = {lo_pt, hi_pt, true};
    return lo_pt.dual >= hi_pt.dual ? lo_pt : hi_pt;
  }

  struct Bracket {
    DualPoint lo, hi;
    bool valid = false;
  };
  const Bracket& bracket() const { return bracket_; }

  // An element of dQ(x) + N_X(x) built from the prox optimality conditions.
  Vec stationarity_element(const DualPoint& p) const {
    const Vec d = p.x - m_.anchor();
    Vec w = Vec::Zero(d.size());
    Vec normal = Vec::Zero(d.size());
    if (slot_ >= 0) {
      if (p.coef > 0.0) {
        w = (p.shifted - p.x) * (p.curvature / p.coef);
      } else {
        w = zeta_by_slot(m_, slot_).subgradient(p.x);
      }
    }
    if (slot_ < 0 || p.coef == 0.0) normal = (p.shifted - p.x) * p.curvature;
    if (slot_ >= 0 && p.coef == 0.0 && m_.feasible_set().kind != SetKind::kWholeSpace) normal.setZero();
    Vec e = m_.objective_part().gradient(d) + normal;
    if (slot_ == 0) e += w;
    for (int i = 0; i < count_; ++i) {
      const auto& part = m_.constraint_part(i);
      const double g = part.value(d) + m_.zeta(i).value(p.x);
      const auto [lo, hi] = m_.hinge(i).subdifferential(g);
      const double h = std::clamp(p.mu[i], lo, hi);
      if (h == 0.0) continue;
      Vec term = part.gradient(d);
      if (slot_ == i + 1) term += w;
      e += h * term;
    }
    return e;
  }

  int evaluations() const { return evaluations_; }

 private:
  const MajorantInstance& m_;
  int slot_;
  int count_;
  int evaluations_ = 0;
  Bracket bracket_;
};

SubsolveResult solve_dual(const MajorantInstance& m, double delta) {
  DualSolver solver(m);
  const DualPoint best = solver.maximize(0, Vec::Zero(m.num_constraints()));
  double dual = best.dual;
  double dual_scale = best.dual_scale;
  Vec x = best.x;
  auto [value, scale] = m.value_and_scale(x);
  double residual = solver.stationarity_element(best).norm();

  // With one constraint x(mu) is piecewise affine, so interpolating across the
  // final bracket recovers digits of x that the mu grid cannot represent.
  const auto& br = solver.bracket();
  if (m.num_constraints() == 1 && br.valid) {
    const double g_lo = br.lo.grad[0];
    const double g_hi = br.hi.grad[0];
    dual = std::max(br.lo.dual, br.hi.dual);
    dual_scale = std::max(br.lo.dual_scale, br.hi.dual_scale);
    if (g_lo > 0.0 && g_hi < 0.0) {
      const double t = g_lo / (g_lo - g_hi);
      Vec xi = br.lo.x + t * (br.hi.x - br.lo.x);
      xi = m.feasible_set().project(xi);
      const auto [vi, si] = m.value_and_scale(xi);
      if (vi < value) {
        x = std::move(xi);
        value = vi;
        scale = si;
        // The interpolated point has no prox certificate of its own.
        residual = std::numeric_limits<double>::infinity();
      }
    }
  }

  SubsolveResult out;
  out.x = std::move(x);
  out.value = value;
  out.cert.delta = delta;
  out.cert.gap_bound = delta * delta / (2.0 * m.l0());
  out.cert.method = SubsolverBackend::kDual;
  out.cert.iterations = solver.evaluations();
  const double gap = value - dual;
  const double magnitude = scale + dual_scale + std::abs(value);
  const bool at_resolution = gap <= kRoundoffFactor * kEps * magnitude ||
                             (best.at_resolution && gap <= std::sqrt(kEps) * magnitude);
  finish_certificate(out.cert, m.l0(), residual, gap, at_resolution);
  return out;
}

// ------------------------------------------------------------ prox-gradient

struct SmoothPart {
  const MajorantInstance& m;

  double value(const Vec& x) const {
    const Vec d = x - m.anchor();
    double f = m.objective_part().value(d);
    for (int i = 0; i < m.num_constraints(); ++i) f += m.hinge(i).value(m.constraint_part(i).value(d));
    return f;
  }

  Vec gradient(const Vec& x) const {
    const Vec d = x - m.anchor();
    Vec g = m.objective_part().gradient(d);
    for (int i = 0; i < m.num_constraints(); ++i) {
      const auto& part = m.constraint_part(i);
      const double w = m.hinge(i).derivative(part.value(d));
      if (w != 0.0) g += w * part.gradient(d);
    }
    return g;
  }

  // Local curvature bound at x used as the initial step estimate.
  double local_bound(const Vec& x) const {
    const Vec d = x - m.anchor();
    double bound = m.l0();
    for (int i = 0; i < m.num_constraints(); ++i) {
      const auto& part = m.constraint_part(i);
      const Hinge& h = m.hinge(i);
      const double second = h.kind == Hinge::Kind::kAugmented ? h.rho : 2.0 * h.rho;
      bound += second * part.gradient(d).squaredNorm() + h.derivative(part.value(d)) * part.curvature;
    }
    return bound;
  }
};

Vec prox_step(const MajorantInstance& m, const Vec& y, double step) {
  if (m.zeta0().is_zero) return m.feasible_set().project(y);
  return m.zeta0().prox(y, step);
}

SubsolveResult solve_prox_gradient(const MajorantInstance& m, const Vec& x0, double delta, int max_iterations) {
  const SmoothPart f{m};
  SubsolveResult out;
  out.cert.delta = delta;
  out.cert.gap_bound = delta * delta / (2.0 * m.l0());
  out.cert.method = SubsolverBackend::kProxGradient;

  Vec x = m.feasible_set().project(x0);
  Vec y = x;
  double t = 1.0;
  double lip = std::max(m.l0(), f.local_bound(x));
  Vec best_x = x;
  double best_res = std::numeric_limits<double>::infinity();
  bool best_roundoff = false;

  int it = 0;
  for (; it < max_iterations; ++it) {
    const Vec grad_y = f.gradient(y);
    const double f_y = f.value(y);
    Vec x_next;
    for (int bt = 0; bt < 200; ++bt) {
      x_next = prox_step(m, y - grad_y / lip, 1.0 / lip);
      const Vec step = x_next - y;
      const double model = f_y + grad_y.dot(step) + 0.5 * lip * step.squaredNorm();
      if (f.value(x_next) <= model + 16.0 * kEps * (std::abs(f_y) + std::abs(model))) break;
      lip *= 2.0;
    }
    const Vec grad_next = f.gradient(x_next);
    const Vec r = lip * (y - x_next) + grad_next - grad_y;
    const double res = r.norm();
    const double floor_res = kRoundoffFactor * kEps *
                             (lip * (y.norm() + x_next.norm()) + grad_y.norm() + grad_next.norm());
    if (res < best_res) {
      best_res = res;
      best_x = x_next;
      best_roundoff = res <= floor_res;
    }
    if (res <= delta || res <= floor_res) {
      ++it;
      break;
    }
    // Adaptive restart keeps the momentum sequence monotone.
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    Vec y_next = x_next + ((t - 1.0) / t_next) * (x_next - x);
    if ((y - x_next).dot(x_next - x) > 0.0) {
      t = 1.0;
      y_next = x_next;
    } else {
      t = t_next;
    }
    x = std::move(x_next);
    y = std::move(y_next);
    lip = std::max(m.l0(), 0.95 * lip);
  }
  out.x = best_x;
  out.value = m.value(best_x);
  out.cert.iterations = it;
  out.cert.residual = best_res;
  out.cert.suboptimality = best_res * best_res / (2.0 * m.l0());
  out.cert.certified = best_res <= delta;
  if (!out.cert.certified && best_roundoff) {
    out.cert.certified = true;
    out.cert.roundoff_limited = true;
  }
  return out;
}

// --------------------------------------------------------------- subgradient

SubsolveResult solve_subgradient(const MajorantInstance& m, const Vec& x0, double delta, int max_iterations) {
  const double mu = m.l0();
  SubsolveResult out;
  out.cert.delta = delta;
  out.cert.gap_bound = delta * delta / (2.0 * mu);
  out.cert.method = SubsolverBackend::kSubgradient;

  Vec x = m.feasible_set().project(x0);
  Vec avg = Vec::Zero(x.size());
  double weight_sum = 0.0;
  double g_max2 = 0.0;
  double bound = std::numeric_limits<double>::infinity();
  int t = 1;
  for (; t <= max_iterations; ++t) {
    const Vec g = m.subgradient(x);
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) {
      out.x = x;
      out.value = m.value(x);
      out.cert.iterations = t;
      out.cert.residual = 0.0;
      out.cert.suboptimality = 0.0;
      out.cert.certified = true;
      return out;
    }
    g_max2 = std::max(g_max2, g2);
    weight_sum += t;
    avg += (static_cast<double>(t) / weight_sum) * (x - avg);
    bound = 2.0 * g_max2 / (mu * (t + 1));
    if (bound <= out.cert.gap_bound) break;
    x = m.feasible_set().project(x - (2.0 / (mu * (t + 1))) * g);
  }
  out.x = m.feasible_set().project(avg);
  out.value = m.value(out.x);
  out.cert.iterations = std::min(t, max_iterations);
  out.cert.suboptimality = bound;
  out.cert.residual = std::sqrt(2.0 * mu * bound);
  out.cert.certified = bound <= out.cert.gap_bound;
  return out;
}

}  // namespace

const char* to_string(SubsolverBackend backend) {
  switch (backend) {
    case SubsolverBackend::kAuto: return "auto";
    case SubsolverBackend::kDual: return "dual";
    case SubsolverBackend::kProxGradient: return "prox-gradient";
    case SubsolverBackend::kSubgradient: return "subgradient";
  }
  return "auto";
}

SubsolverBackend parse_backend(const std::string& name) {
  if (name == "auto") return SubsolverBackend::kAuto;
  if (name == "dual") return SubsolverBackend::kDual;
  if (name == "prox-gradient") return SubsolverBackend::kProxGradient;
  if (name == "subgradient") return SubsolverBackend::kSubgradient;
  throw Error(ErrorCode::kInvalidArgument, "unknown subsolver backend '" + name + "'");
}

bool dual_supported(const MajorantInstance& m, const SubsolveOptions& opts) {
  if (m.num_constraints() > opts.max_dual_constraints) return false;
  const int slot = nonzero_zeta(m);
  if (slot == -2) return false;
  if (slot >= 0) {
    if (!zeta_by_slot(m, slot).has_prox()) return false;
    if (m.feasible_set().kind != SetKind::kWholeSpace) return false;
  }
  return true;
}

bool prox_gradient_supported(const MajorantInstance& m) {
  for (int i = 0; i < m.num_constraints(); ++i) {
    if (!m.hinge(i).smooth() || !m.zeta(i).is_zero) return false;
  }
  if (m.zeta0().is_zero) return true;
  return m.zeta0().has_prox() && m.feasible_set().kind == SetKind::kWholeSpace;
}

SubsolverBackend resolve_backend(const MajorantInstance& m, const SubsolveOptions& opts) {
  switch (opts.backend) {
    case SubsolverBackend::kAuto:
      if (dual_supported(m, opts)) return SubsolverBackend::kDual;
      if (prox_gradient_supported(m)) return SubsolverBackend::kProxGradient;
      return SubsolverBackend::kSubgradient;
    case SubsolverBackend::kDual:
      if (!dual_supported(m, opts)) throw Error(ErrorCode::kUnsupported, "dual backend cannot handle this majorant");
      return SubsolverBackend::kDual;
    case SubsolverBackend::kProxGradient:
      if (!prox_gradient_supported(m))
        throw Error(ErrorCode::kUnsupported, "prox-gradient backend cannot handle this majorant");
      return SubsolverBackend::kProxGradient;
    case SubsolverBackend::kSubgradient: return SubsolverBackend::kSubgradient;
  }
  return SubsolverBackend::kSubgradient;
}

SubsolveResult solve_certified(const MajorantInstance& m, const Vec& x0, double delta, const SubsolveOptions& opts) {
  if (!(m.l0() > 0.0)) throw Error(ErrorCode::kNotStronglyConvex, "majorant modulus L0 must be positive");
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be positive");
  if (x0.size() != m.dimension()) throw Error(ErrorCode::kDimensionMismatch, "initial point dimension");
  switch (resolve_backend(m, opts)) {
    case SubsolverBackend::kDual: return solve_dual(m, delta);
    case SubsolverBackend::kProxGradient: return solve_prox_gradient(m, x0, delta, opts.max_iterations);
    default: return solve_subgradient(m, x0, delta, opts.max_iterations);
  }
}

}  // namespace dcopt
