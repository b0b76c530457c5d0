#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "adatag/kernels.hpp"
#include "adatag/random.hpp"

namespace k = adatag::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  adatag::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// Shapes from the decoder hypernetwork (4 d_h x d_r) and the LSTM gates.
void BM_gemv_serial(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto a = random_vec(m * n, 1), x = random_vec(n, 2);
  std::vector<double> y(m);
  for (auto _ : state) {
    k::serial::gemv(a, m, n, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_gemv_omp(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto a = random_vec(m * n, 1), x = random_vec(n, 2);
  std::vector<double> y(m);
  for (auto _ : state) {
    k::omp::gemv(a, m, n, x, y, 0);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_ger_serial(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  auto a = random_vec(m * n, 1);
  const auto x = random_vec(m, 2), y = random_vec(n, 3);
  for (auto _ : state) {
    k::serial::ger(a, m, n, x, y);
    benchmark::DoNotOptimize(a.data());
  }
}

void BM_ger_omp(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  auto a = random_vec(m * n, 1);
  const auto x = random_vec(m, 2), y = random_vec(n, 3);
  for (auto _ : state) {
    k::omp::ger(a, m, n, x, y, 0);
    benchmark::DoNotOptimize(a.data());
  }
}

void BM_gemm_serial(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto a = random_vec(s * s, 1), b = random_vec(s * s, 2);
  std::vector<double> c(s * s);
  for (auto _ : state) {
    k::serial::gemm(a, b, c, s, s, s);
    benchmark::DoNotOptimize(c.data());
  }
}

void BM_gemm_omp(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto a = random_vec(s * s, 1), b = random_vec(s * s, 2);
  std::vector<double> c(s * s);
  for (auto _ : state) {
    k::omp::gemm(a, b, c, s, s, s, 0);
    benchmark::DoNotOptimize(c.data());
  }
}

}  // namespace

BENCHMARK(BM_gemv_serial)->Args({800, 1536})->Args({400, 150});
BENCHMARK(BM_gemv_omp)->Args({800, 1536})->Args({400, 150})->UseRealTime();
BENCHMARK(BM_ger_serial)->Args({800, 1536})->Args({400, 150});
BENCHMARK(BM_ger_omp)->Args({800, 1536})->Args({400, 150})->UseRealTime();
BENCHMARK(BM_gemm_serial)->Arg(64)->Arg(256);
BENCHMARK(BM_gemm_omp)->Arg(64)->Arg(256)->UseRealTime();

BENCHMARK_MAIN();
