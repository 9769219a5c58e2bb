// Serial reference vs OpenMP kernels at GCN-sized shapes.

#include <benchmark/benchmark.h>

#include <random>

#include "htgcn/kernels.hpp"

namespace {

using htgcn::DenseMatrix;
namespace k = htgcn::kernels;

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  DenseMatrix m(r, c);
  for (double& v : m.values()) v = d(rng);
  return m;
}

// Square adjacency times an n x 16 feature block, the dominant product of a forward pass.
template <bool Parallel>
void BM_gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(n, n, 1);
  const DenseMatrix b = random_matrix(n, 16, 2);
  DenseMatrix c;
  for (auto _ : state) {
    if constexpr (Parallel) k::gemm(a, b, c);
    else k::serial::gemm(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * 16));
}

// Weight gradient: X^T G.
template <bool Parallel>
void BM_gemm_tn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(n, 16, 3);
  const DenseMatrix b = random_matrix(n, 16, 4);
  DenseMatrix c;
  for (auto _ : state) {
    if constexpr (Parallel) k::gemm_tn(a, b, c);
    else k::serial::gemm_tn(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
}

// Input gradient: G W^T.
template <bool Parallel>
void BM_gemm_nt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(n, 16, 5);
  const DenseMatrix b = random_matrix(32, 16, 6);
  DenseMatrix c;
  for (auto _ : state) {
    if constexpr (Parallel) k::gemm_nt(a, b, c);
    else k::serial::gemm_nt(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
}

template <bool Parallel>
void BM_row_outer(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(p, 8, 7);
  const DenseMatrix b = random_matrix(p, 8, 8);
  for (auto _ : state) {
    DenseMatrix out = Parallel ? k::row_outer(a, b) : k::serial::row_outer(a, b);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_degree_normalize(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(n, n, 9);
  std::vector<double> degree(n);
  for (std::size_t i = 0; i < n; ++i) degree[i] = 1.0 + static_cast<double>(i % 13);
  for (auto _ : state) {
    DenseMatrix out = Parallel ? k::degree_normalize(a, degree) : k::serial::degree_normalize(a, degree);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_gemm<false>)->Name("gemm/serial")->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(BM_gemm<true>)->Name("gemm/openmp")->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(BM_gemm_tn<false>)->Name("gemm_tn/serial")->Arg(1024)->Arg(8192);
BENCHMARK(BM_gemm_tn<true>)->Name("gemm_tn/openmp")->Arg(1024)->Arg(8192);
BENCHMARK(BM_gemm_nt<false>)->Name("gemm_nt/serial")->Arg(1024)->Arg(8192);
BENCHMARK(BM_gemm_nt<true>)->Name("gemm_nt/openmp")->Arg(1024)->Arg(8192);
BENCHMARK(BM_row_outer<false>)->Name("row_outer/serial")->Arg(1024)->Arg(16384);
BENCHMARK(BM_row_outer<true>)->Name("row_outer/openmp")->Arg(1024)->Arg(16384);
BENCHMARK(BM_degree_normalize<false>)->Name("degree_normalize/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_degree_normalize<true>)->Name("degree_normalize/openmp")->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
