#pragma once

// Test instances: the 1-D worked example, random quadratic DC programs with
// two max-of-two constraints, and l1-constrained sparse recovery with the
// separable cap h(x) = sum_k max{x_k - s, 0, -x_k - s}.
//
// Instance file layout (text, one item per line):
//
//   dcopt-instance
//   version 1
//   kind <example-4-1 | quadratic-dc | sparse-recovery>
//   seed <uint64>
//   param <name> <value>                      (sorted by name)
//   block <name> <rows> <cols>                (sorted by name)
//   <rows lines of cols values, %.17g>
//   end
//   checksum <16 hex digits>                  (FNV-1a 64 of every byte above)

#include <cstdint>
#include <map>
#include <string>

#include "dcopt/dc_model.hpp"

namespace dcopt {

enum class InstanceKind { kExample41, kQuadraticDC, kSparseRecovery };

const char* to_string(InstanceKind kind);
InstanceKind parse_instance_kind(const std::string& name);

/// Oracle-free description of an instance.
struct InstanceData {
  InstanceKind kind = InstanceKind::kExample41;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
  /// Vectors are stored as single columns.
  std::map<std::string, Mat> blocks;

  const Mat& block(const std::string& name) const;
  double param(const std::string& name) const;
};

inline constexpr int kInstanceFormatVersion = 1;

/// Builds the oracles. The initial point is block "x0".
DCProgram materialize(const InstanceData& data);
Vec initial_point(const InstanceData& data);

/// F(x) = |x| - max{6x, x}, 2x - max{-x, x} <= 0 on the real line, with
/// ||x||^2/2 added to phi0 and to both psi0 pieces so that L0 = 1.
DCProgram example_4_1();
InstanceData example_4_1_data();

/// Closed-form AL iterates of the worked example (eps = inf, alpha = 1,
/// sigma = 2, lambda^0 = 0) at outer iteration k. x and merit entries are
/// multiplied by rho_k; pairs are ordered (1,1), (1,2), (2,1), (2,2).
struct ExampleRow {
  double x_rho[4];
  double lambda[4];
  double merit_rho[4];
  double xk_rho;
  double lambda_next;
};
ExampleRow example_4_1_closed_form(int k);

/// Q, A_i, B_ij = U Diag(d) U' with d ~ U[0, 20] and U orthogonal from the QR
/// factor of a Gaussian matrix; q, a_i, b_ij, c_i, d_ij standard normal; the
/// initial point is standard normal. Requires n >= 2.
InstanceData gen_quadratic_dc(int n, std::uint64_t seed);

/// A with orthonormal rows, K-sparse x* with +-1 entries, b = A x* + xi with
/// xi ~ N(0, noise_variance I_m). The initial point solves
/// min ||Ax - b||^2 s.t. ||x||_1 <= sK.
inline constexpr double kDefaultNoiseVariance = 1e-3;
InstanceData gen_sparse_recovery(int m, int n, int k, double s, std::uint64_t seed,
                                 double noise_variance = kDefaultNoiseVariance);

/// Sum_k max{x_k - s, 0, -x_k - s} as a separable max.
SeparableMaxFn sparse_cap(int n, double s);

/// argmin ||Ax - b||^2 s.t. ||x||_1 <= radius, by accelerated projected gradient.
Vec l1_ball_least_squares(const Mat& a, const Vec& b, double radius, int max_iterations = 20000);

/// Euclidean projection onto {||x||_1 <= radius}.
Vec project_l1_ball(const Vec& v, double radius);

std::string serialize_instance(const InstanceData& data);
InstanceData parse_instance(const std::string& text);

void save_instance(const InstanceData& data, const std::string& path);
InstanceData load_instance(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);

/// %.17g.
std::string format_double(double v);

}  // namespace dcopt
