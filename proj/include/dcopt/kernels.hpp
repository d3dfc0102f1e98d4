#pragma once

// Data-parallel inner loops used by the solver hot paths.
//
// Every kernel exists twice: `serial::` is the plain reference loop kept for
// testing and benchmarking, `parallel::` is the OpenMP version the library
// calls. Parallel reductions accumulate fixed-size blocks and combine the
// block partials in order, so their results do not depend on the number of
// threads.

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace dcopt::kernels {

/// One piece of a coordinate-wise max: curvature/2 * t^2 + slope * t + intercept.
struct ScalarPiece {
  double curvature = 0.0;
  double slope = 0.0;
  double intercept = 0.0;

  double value(double t) const { return (0.5 * curvature * t + slope) * t + intercept; }
  double derivative(double t) const { return curvature * t + slope; }
};

/// Block length of the deterministic reductions.
inline constexpr std::size_t kReductionBlock = 256;

/// Vectors shorter than this run the parallel kernels on one thread.
inline constexpr std::size_t kParallelThreshold = 2048;

using Span = std::span<const double>;
using MutSpan = std::span<double>;
using PieceSpan = std::span<const ScalarPiece>;

namespace serial {

double dot(Span a, Span b);
double l1_norm(Span x);
void soft_threshold(Span v, double threshold, MutSpan out);
void gemv(const Eigen::MatrixXd& a, Span x, MutSpan y);
void gemv_t(const Eigen::MatrixXd& a, Span x, MutSpan y);
double separable_max_value(Span x, PieceSpan pieces);
void separable_active_masks(Span x, PieceSpan pieces, double eps, std::span<std::uint32_t> masks);
double separable_selected_value(Span x, PieceSpan pieces, std::span<const int> selection);
void separable_selected_gradient(Span x, PieceSpan pieces, std::span<const int> selection,
                                 MutSpan grad);

}  // namespace serial

namespace parallel {

double dot(Span a, Span b);
double l1_norm(Span x);
void soft_threshold(Span v, double threshold, MutSpan out);
void gemv(const Eigen::MatrixXd& a, Span x, MutSpan y);
void gemv_t(const Eigen::MatrixXd& a, Span x, MutSpan y);
double separable_max_value(Span x, PieceSpan pieces);
void separable_active_masks(Span x, PieceSpan pieces, double eps, std::span<std::uint32_t> masks);
double separable_selected_value(Span x, PieceSpan pieces, std::span<const int> selection);
void separable_selected_gradient(Span x, PieceSpan pieces, std::span<const int> selection,
                                 MutSpan grad);

}  // namespace parallel

/// Number of OpenMP threads available to the parallel kernels (1 without OpenMP).
int max_threads();

inline Span view(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline MutSpan view(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace dcopt::kernels
