// Serial reference loops vs the OpenMP kernels. Run with OMP_NUM_THREADS set
// to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dcopt/kernels.hpp"

namespace k = dcopt::kernels;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(gen);
  return v;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols) {
  const Eigen::VectorXd flat = random_vector(rows * cols, 4);
  return Eigen::Map<const Eigen::MatrixXd>(flat.data(), rows, cols);
}

// Pieces of the sparse recovery cap max{t - s, 0, -t - s}.
const std::vector<k::ScalarPiece> kCap{{0.0, 1.0, -0.1}, {0.0, 0.0, 0.0}, {0.0, -1.0, -0.1}};

template <double (*Dot)(k::Span, k::Span)>
void bm_dot(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::VectorXd a = random_vector(n, 1), b = random_vector(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Dot(k::view(a), k::view(b)));
  state.SetItemsProcessed(state.iterations() * n);
}

template <void (*Gemv)(const Eigen::MatrixXd&, k::Span, k::MutSpan)>
void bm_gemv_t(benchmark::State& state) {
  const auto m = state.range(0), n = 4 * state.range(0);
  const Eigen::MatrixXd a = random_matrix(m, n);
  const Eigen::VectorXd x = random_vector(m, 5);
  Eigen::VectorXd y(n);
  for (auto _ : state) {
    Gemv(a, k::view(x), k::view(y));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * m * n);
}

template <double (*Value)(k::Span, k::PieceSpan)>
void bm_separable_max(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::VectorXd x = random_vector(n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(Value(k::view(x), kCap));
  state.SetItemsProcessed(state.iterations() * n);
}

template <void (*Soft)(k::Span, double, k::MutSpan)>
void bm_soft_threshold(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::VectorXd v = random_vector(n, 7);
  Eigen::VectorXd out(n);
  for (auto _ : state) {
    Soft(k::view(v), 0.5, k::view(out));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(bm_dot<k::serial::dot>)->Name("dot/serial")->RangeMultiplier(8)->Range(1 << 10, 1 << 20);
BENCHMARK(bm_dot<k::parallel::dot>)->Name("dot/parallel")->RangeMultiplier(8)->Range(1 << 10, 1 << 20);
BENCHMARK(bm_gemv_t<k::serial::gemv_t>)->Name("gemv_t/serial")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(bm_gemv_t<k::parallel::gemv_t>)->Name("gemv_t/parallel")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(bm_separable_max<k::serial::separable_max_value>)
    ->Name("separable_max/serial")
    ->RangeMultiplier(8)
    ->Range(1 << 10, 1 << 20);
BENCHMARK(bm_separable_max<k::parallel::separable_max_value>)
    ->Name("separable_max/parallel")
    ->RangeMultiplier(8)
    ->Range(1 << 10, 1 << 20);
BENCHMARK(bm_soft_threshold<k::serial::soft_threshold>)->Name("soft_threshold/serial")->Range(1 << 10, 1 << 20);
BENCHMARK(bm_soft_threshold<k::parallel::soft_threshold>)->Name("soft_threshold/parallel")->Range(1 << 10, 1 << 20);

BENCHMARK_MAIN();
