#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "toposdf/kernels.hpp"

using namespace toposdf;

namespace {

std::vector<double> random_vec(std::size_t n) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> p(n);
  for (auto& x : p) x = {u(rng), u(rng), u(rng)};
  return p;
}

template <bool Parallel>
void BM_Affine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 64;
  const auto in = random_vec(n * d), w = random_vec(d * d), b = random_vec(d);
  std::vector<double> out(n * d);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::affine(in, w, b, out, n, d, d);
    else kernels::ref::affine(in, w, b, out, n, d, d);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * d * d));
}

template <bool Parallel>
void BM_MatmulTN(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 64;
  const auto x = random_vec(n * d), dy = random_vec(n * d);
  std::vector<double> out(d * d);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::matmul_tn(x, dy, out, n, d, d);
    else kernels::ref::matmul_tn(x, dy, out, n, d, d);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_NearestSq(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = random_points(n, 1), q = random_points(n, 2);
  std::vector<double> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::nearest_sq_dist(p, q, out);
    else kernels::ref::nearest_sq_dist(p, q, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_Affine<false>)->Arg(512)->Arg(4096);
BENCHMARK(BM_Affine<true>)->Arg(512)->Arg(4096);
BENCHMARK(BM_MatmulTN<false>)->Arg(512)->Arg(4096);
BENCHMARK(BM_MatmulTN<true>)->Arg(512)->Arg(4096);
BENCHMARK(BM_NearestSq<false>)->Arg(1000)->Arg(4000);
BENCHMARK(BM_NearestSq<true>)->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
