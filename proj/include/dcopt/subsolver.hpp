#pragma once

// Certified minimization of a strongly convex majorant over X.
//
// Every result carries a certificate that the returned point x satisfies
//   Q(x) - min_X Q <= delta^2 / (2 L0),
// obtained from one of
//   * a duality gap (dual backend),
//   * the prox-gradient mapping residual, which bounds dist(0, d[Q + i_X](x)),
//   * the averaged strongly convex subgradient bound 2 G^2 / (L0 (T + 1)).

#include <string>

#include "dcopt/majorants.hpp"

namespace dcopt {

enum class SubsolverBackend { kAuto, kDual, kProxGradient, kSubgradient };

const char* to_string(SubsolverBackend backend);
SubsolverBackend parse_backend(const std::string& name);

struct SubsolveCertificate {
  double delta = 0.0;
  /// delta^2 / (2 L0).
  double gap_bound = 0.0;
  SubsolverBackend method = SubsolverBackend::kAuto;
  /// Certified bound on dist(0, d[Q + i_X](x)), or sqrt(2 L0 * gap) when the
  /// certificate is a function-value gap.
  double residual = 0.0;
  /// Proven bound on Q(x) - min_X Q.
  double suboptimality = 0.0;
  int iterations = 0;
  bool certified = false;
  /// Set when the requested accuracy is below the floating-point resolution
  /// of Q and the point was accepted at that resolution instead.
  bool roundoff_limited = false;
};

struct SubsolveOptions {
  SubsolverBackend backend = SubsolverBackend::kAuto;
  int max_iterations = 200000;
  /// The dual backend nests one bisection per constraint.
  int max_dual_constraints = 3;
};

struct SubsolveResult {
  Vec x;
  double value = 0.0;
  SubsolveCertificate cert;
};

/// Dual backend applies: at most one nonzero zeta (with prox), X whole-space
/// whenever some zeta is nonzero, few constraints.
bool dual_supported(const MajorantInstance& m, const SubsolveOptions& opts = {});
/// Prox-gradient backend applies: smooth hinges, zeta_i = 0 for constraints,
/// prox of zeta0 + i_X available.
bool prox_gradient_supported(const MajorantInstance& m);

SubsolverBackend resolve_backend(const MajorantInstance& m, const SubsolveOptions& opts);

/// Never throws on lack of convergence: returns the best point with
/// cert.certified == false. Throws kUnsupported if an explicitly requested
/// backend cannot handle the instance.
SubsolveResult solve_certified(const MajorantInstance& m, const Vec& x0, double delta,
                               const SubsolveOptions& opts = {});

}  // namespace dcopt
