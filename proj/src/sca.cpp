#include "dcopt/sca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dcopt/rng.hpp"

namespace dcopt {

double default_delta(int t) { return std::pow(10.0, -t - 1); }

namespace {

// delta_t underflows to zero after a few hundred moves; the subsolver needs
// a positive target and then falls back to its roundoff certificate.
double usable_delta(const SCAConfig& cfg, int t) {
  const double d = cfg.delta(t);
  if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorCode::kInvalidArgument, "delta schedule must be finite and >= 0");
  return std::max(d, std::numeric_limits<double>::min());
}

struct PairSolve {
  MultiIndex index;
  SubsolveResult sub;
  double merit = 0.0;
};

PairSolve solve_pair(const DCProgram& prog, double rho, const MeritMode& mode, const Vec& x, const MultiIndex& index,
                     double delta, const SubsolveOptions& opts) {
  const MajorantInstance m(prog, rho, mode, x, index);
  PairSolve out;
  out.index = index;
  out.sub = solve_certified(m, x, delta, opts);
  if (!out.sub.cert.certified) {
    throw Error(ErrorCode::kCertificationFailed,
                "subsolve for pair " + to_string(index) + " not certified (residual " +
                    std::to_string(out.sub.cert.residual) + ", delta " + std::to_string(delta) + ")");
  }
  out.merit = merit_value(prog, rho, mode, out.sub.x);
  return out;
}

}  // namespace

SCAResult sca_solve(const DCProgram& prog, double rho, const MeritMode& mode, const Vec& x0, const SCAConfig& cfg) {
  check_mode(prog, rho, mode);
  check_dimension(prog, x0);
  if (!(cfg.eps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be >= 0");
  if (!(cfg.eta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eta must be positive");
  if (!prog.feasible_set.contains(x0, 1e-9 * (1.0 + x0.norm())))
    throw Error(ErrorCode::kInvalidArgument, "initial point is not in X");

  const double l0 = prog.l0();
  SCAResult res;
  Vec x = x0;
  double fx = merit_value(prog, rho, mode, x);
  const int chunk = cfg.parallel_pairs ? std::max(1, kernels::max_threads()) : 1;

  int t = 0;
  while (true) {
    const ActiveProduct pairs = eps_active_pairs(prog, x, cfg.eps, cfg.pair_cap);
    const double delta = usable_delta(cfg, t);
    const double slack = delta * delta / (2.0 * l0);
    res.certified_pairs.clear();
    bool moved = false;

    for (std::uint64_t start = 0; start < pairs.cardinality() && !moved;) {
      const auto count = static_cast<int>(std::min<std::uint64_t>(chunk, pairs.cardinality() - start));
      std::vector<PairSolve> batch(static_cast<std::size_t>(count));
      if (count > 1) {
        std::vector<std::string> failures(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
        for (int k = 0; k < count; ++k) {
          try {
            batch[static_cast<std::size_t>(k)] =
                solve_pair(prog, rho, mode, x, pairs.at(start + static_cast<std::uint64_t>(k)), delta, cfg.subsolver);
          } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(k)] = e.what();
          }
        }
        for (int k = 0; k < count; ++k) {
          if (!failures[static_cast<std::size_t>(k)].empty())
            throw Error(ErrorCode::kCertificationFailed, failures[static_cast<std::size_t>(k)]);
        }
      } else {
        batch[0] = solve_pair(prog, rho, mode, x, pairs.at(start), delta, cfg.subsolver);
      }

      for (auto& p : batch) {
        ++res.total_subsolves;
        if (fx - p.merit + slack > cfg.eta) {
          res.moves.push_back({p.index, fx, p.merit, delta});
          x = std::move(p.sub.x);
          fx = p.merit;
          ++t;
          moved = true;
          break;
        }
        res.certified_pairs.push_back({std::move(p.index), std::move(p.sub.x), p.merit, p.sub.cert});
      }
      start += static_cast<std::uint64_t>(count);
    }

    if (!moved) {
      res.terminated = true;
      break;
    }
    if (t >= cfg.max_outer) {
      res.certified_pairs.clear();
      break;
    }
  }
  res.x_final = std::move(x);
  res.merit_final = fx;
  res.outer_iterations = t;
  return res;
}

InexactReport verify_inexact_condition(const DCProgram& prog, double rho, const MeritMode& mode, const Vec& x,
                                       double eps, double eta, int n_samples, std::uint64_t seed, double tol) {
  check_mode(prog, rho, mode);
  const double fx = merit_value(prog, rho, mode, x);
  const ActiveProduct pairs = eps_active_pairs(prog, x, eps);
  InexactReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  const double radius = 1.0 + x.norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(x.size(), 1)));

  for (std::uint64_t k = 0; k < pairs.cardinality(); ++k) {
    PairMargin pm;
    pm.index = pairs.at(k);
    const MajorantInstance m(prog, rho, mode, x, pm.index);
    const SubsolveResult sub = solve_certified(m, x, 1e-9);
    // suboptimality is a proven bound whether or not the target was met.
    const double lower = sub.value - sub.cert.suboptimality;
    pm.margin = lower + eta - fx;
    pm.sample_margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_samples; ++s) {
      const double scale = radius * std::pow(10.0, -rng.uniform(0.0, 6.0));
      const Vec y = prog.feasible_set.project(x + scale * rng.normal_vector(x.size()));
      pm.sample_margin = std::min(pm.sample_margin, m.value(y) + eta - fx);
    }
    report.worst_margin = std::min({report.worst_margin, pm.margin, pm.sample_margin});
    report.pairs.push_back(std::move(pm));
  }
  if (pairs.empty()) report.worst_margin = 0.0;
  report.violated = report.worst_margin < -tol;
  return report;
}

}  // namespace dcopt
