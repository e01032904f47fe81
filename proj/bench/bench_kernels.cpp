// Serial reference kernels against their OpenMP counterparts, plus the
// three SVD routes. Thread count follows OMP_NUM_THREADS.

#include "romflow/blocks.hpp"
#include "romflow/ecm.hpp"
#include "romflow/svd.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace romflow;

namespace {

BlockedMatrix random_blocked(Index rows, Index cols, BlockShape shape, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Dense m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
  }
  return BlockedMatrix::from_dense(m, shape);
}

const BlockShape kShape{512, 64};

void BM_matmul_ref(benchmark::State& st) {
  const auto a = random_blocked(st.range(0), 256, kShape, 1);
  const auto b = random_blocked(256, 128, kShape, 2);
  for (auto _ : st) benchmark::DoNotOptimize(ref::matmul(a, b));
}
void BM_matmul_omp(benchmark::State& st) {
  const auto a = random_blocked(st.range(0), 256, kShape, 1);
  const auto b = random_blocked(256, 128, kShape, 2);
  for (auto _ : st) benchmark::DoNotOptimize(matmul(a, b));
}

void BM_transpose_matmul_ref(benchmark::State& st) {
  const auto a = random_blocked(st.range(0), 128, kShape, 3);
  for (auto _ : st) benchmark::DoNotOptimize(ref::transpose_matmul(a, a));
}
void BM_transpose_matmul_omp(benchmark::State& st) {
  const auto a = random_blocked(st.range(0), 128, kShape, 3);
  for (auto _ : st) benchmark::DoNotOptimize(transpose_matmul(a, a));
}

void BM_frobenius_ref(benchmark::State& st) {
  const auto a = random_blocked(st.range(0), 256, kShape, 4);
  for (auto _ : st) benchmark::DoNotOptimize(ref::frobenius_norm(a));
}
void BM_frobenius_omp(benchmark::State& st) {
  const auto a = random_blocked(st.range(0), 256, kShape, 4);
  for (auto _ : st) benchmark::DoNotOptimize(frobenius_norm(a));
}

void BM_select_rows_ref(benchmark::State& st) {
  const auto a = random_blocked(st.range(0), 256, kShape, 5);
  std::vector<Index> idx;
  for (Index i = 0; i < a.rows(); i += 3) idx.push_back(i);
  for (auto _ : st) benchmark::DoNotOptimize(ref::select_rows(a, idx));
}
void BM_select_rows_omp(benchmark::State& st) {
  const auto a = random_blocked(st.range(0), 256, kShape, 5);
  std::vector<Index> idx;
  for (Index i = 0; i < a.rows(); i += 3) idx.push_back(i);
  for (auto _ : st) benchmark::DoNotOptimize(select_rows(a, idx));
}

void BM_svd(benchmark::State& st, SvdAlgorithm alg) {
  const auto a = random_blocked(st.range(0), 32, kShape, 6);
  const auto s = matmul(a, random_blocked(32, 256, kShape, 7));
  SvdSettings settings;
  settings.algorithm = alg;
  settings.truncation = TruncationSpec::tolerance(1e-8);
  for (auto _ : st) benchmark::DoNotOptimize(compute_basis(s, settings));
}

void BM_ecm(benchmark::State& st) {
  const Dense g = random_blocked(st.range(0), 24, kShape, 8).to_dense();
  for (auto _ : st) benchmark::DoNotOptimize(ecm(g, nullptr, 1e-8));
}

}  // namespace

BENCHMARK(BM_matmul_ref)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_matmul_omp)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transpose_matmul_ref)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transpose_matmul_omp)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_frobenius_ref)->Arg(16384)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_frobenius_omp)->Arg(16384)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_select_rows_ref)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_select_rows_omp)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_svd, full_tsqr, SvdAlgorithm::full_tsqr)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_svd, randomized, SvdAlgorithm::randomized)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_svd, lanczos, SvdAlgorithm::lanczos)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ecm)->Arg(2048)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
