#include "dcopt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcopt::kernels {

namespace {

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double coordinate_max(double t, PieceSpan pieces) {
  double best = -std::numeric_limits<double>::infinity();
  for (const ScalarPiece& piece : pieces) best = std::max(best, piece.value(t));
  return best;
}

std::uint32_t coordinate_mask(double t, PieceSpan pieces, double eps) {
  const double top = coordinate_max(t, pieces);
  std::uint32_t mask = 0;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    if (top <= pieces[j].value(t) + eps) mask |= (1u << j);
  }
  return mask;
}

std::size_t num_blocks(std::size_t n) { return (n + kReductionBlock - 1) / kReductionBlock; }

// Sums f(i) over [0, n) block by block; block partials are combined in order.
template <class F>
double blocked_sum(std::size_t n, F&& f) {
  const std::size_t blocks = num_blocks(n);
  if (blocks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f(i);
    return s;
  }
  std::vector<double> partial(blocks, 0.0);
  const long nb = static_cast<long>(blocks);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (long b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

double dot(Span a, Span b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l1_norm(Span x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

void soft_threshold(Span v, double threshold, MutSpan out) {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = soft(v[i], threshold);
}

void gemv(const Eigen::MatrixXd& a, Span x, MutSpan y) {
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) s += a(r, c) * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = s;
  }
}

void gemv_t(const Eigen::MatrixXd& a, Span x, MutSpan y) {
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    double s = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) s += a(r, c) * x[static_cast<std::size_t>(r)];
    y[static_cast<std::size_t>(c)] = s;
  }
}

double separable_max_value(Span x, PieceSpan pieces) {
  double s = 0.0;
  for (double t : x) s += coordinate_max(t, pieces);
  return s;
}

void separable_active_masks(Span x, PieceSpan pieces, double eps, std::span<std::uint32_t> masks) {
  for (std::size_t i = 0; i < x.size(); ++i) masks[i] = coordinate_mask(x[i], pieces, eps);
}

double separable_selected_value(Span x, PieceSpan pieces, std::span<const int> selection) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += pieces[static_cast<std::size_t>(selection[i])].value(x[i]);
  return s;
}

void separable_selected_gradient(Span x, PieceSpan pieces, std::span<const int> selection,
                                 MutSpan grad) {
  for (std::size_t i = 0; i < x.size(); ++i)
    grad[i] = pieces[static_cast<std::size_t>(selection[i])].derivative(x[i]);
}

}  // namespace serial

namespace parallel {

double dot(Span a, Span b) {
  return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double l1_norm(Span x) {
  return blocked_sum(x.size(), [&](std::size_t i) { return std::abs(x[i]); });
}

void soft_threshold(Span v, double threshold, MutSpan out) {
  const long n = static_cast<long>(v.size());
#pragma omp parallel for schedule(static) if (v.size() >= kParallelThreshold)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = soft(v[k], threshold);
  }
}

void gemv(const Eigen::MatrixXd& a, Span x, MutSpan y) {
  const long rows = static_cast<long>(a.rows());
  const Eigen::Index cols = a.cols();
#pragma omp parallel for schedule(static) if (a.size() >= static_cast<long>(kParallelThreshold) * 16)
  for (long r = 0; r < rows; ++r) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) s += a(r, c) * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = s;
  }
}

void gemv_t(const Eigen::MatrixXd& a, Span x, MutSpan y) {
  const long cols = static_cast<long>(a.cols());
  const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static) if (a.size() >= static_cast<long>(kParallelThreshold) * 16)
  for (long c = 0; c < cols; ++c) {
    const double* col = a.data() + c * rows;
    double s = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) s += col[r] * x[static_cast<std::size_t>(r)];
    y[static_cast<std::size_t>(c)] = s;
  }
}

double separable_max_value(Span x, PieceSpan pieces) {
  return blocked_sum(x.size(), [&](std::size_t i) { return coordinate_max(x[i], pieces); });
}

void separable_active_masks(Span x, PieceSpan pieces, double eps, std::span<std::uint32_t> masks) {
  const long n = static_cast<long>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= kParallelThreshold)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    masks[k] = coordinate_mask(x[k], pieces, eps);
  }
}

double separable_selected_value(Span x, PieceSpan pieces, std::span<const int> selection) {
  return blocked_sum(x.size(), [&](std::size_t i) {
    return pieces[static_cast<std::size_t>(selection[i])].value(x[i]);
  });
}

void separable_selected_gradient(Span x, PieceSpan pieces, std::span<const int> selection,
                                 MutSpan grad) {
  const long n = static_cast<long>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= kParallelThreshold)
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    grad[k] = pieces[static_cast<std::size_t>(selection[k])].derivative(x[k]);
  }
}

}  // namespace parallel

}  // namespace dcopt::kernels
