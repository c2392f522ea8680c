// Serial reference kernels against their OpenMP variants, plus the replicate
// runner. Thread count is the second benchmark argument (0 = serial).

#include <benchmark/benchmark.h>

#include <random>

#include "specnoise/experiments.hpp"
#include "specnoise/kernels.hpp"
#include "specnoise/linalg.hpp"
#include "specnoise/models.hpp"

namespace {

using specnoise::Matrix;
namespace k = specnoise::kernels;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = d(g);
  return m;
}

void BM_BlockProduct(benchmark::State& state) {
  const auto n = state.range(0);
  const int threads = static_cast<int>(state.range(1));
  const Matrix s = random_matrix(n, n, 1), b = random_matrix(n, 3, 2);
  for (auto _ : state) {
    Matrix out = threads == 0 ? k::serial::block_product(s, b) : k::parallel::block_product(s, b, threads);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * 3);
}

void BM_RowNorms(benchmark::State& state) {
  const auto n = state.range(0);
  const int threads = static_cast<int>(state.range(1));
  const Matrix t = random_matrix(n, 3, 3);
  for (auto _ : state) {
    auto out = threads == 0 ? k::serial::row_norms(t) : k::parallel::row_norms(t, threads);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_PowerSequence(benchmark::State& state) {
  const auto n = state.range(0);
  const int threads = static_cast<int>(state.range(1));
  const Matrix s = random_matrix(n, n, 4), b = random_matrix(n, 2, 5);
  for (auto _ : state) {
    auto out = threads == 0 ? k::serial::power_sequence(s, b, 4) : k::parallel::power_sequence(s, b, 4, threads);
    benchmark::DoNotOptimize(out.back().data());
  }
}

void BM_ReplicateRunner(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const auto spec = specnoise::constant_spike(300, 300.0, {specnoise::NoiseKind::gaussian, 1.0, {}});
  auto task = [&](std::size_t i) {
    const auto inst = specnoise::spike_model(spec, i);
    return specnoise::top_r(inst.m_hat, 1).values(0);
  };
  for (auto _ : state) {
    auto out = threads == 0 ? specnoise::run_replicates_serial<double>(16, task)
                            : specnoise::run_replicates<double>(16, task, threads);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_BlockProduct)->ArgsProduct({{500, 2000}, {0, 1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RowNorms)->ArgsProduct({{10000, 1000000}, {0, 1, 2, 4}})->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_PowerSequence)->ArgsProduct({{500, 1000}, {0, 1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ReplicateRunner)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
