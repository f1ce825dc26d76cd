#include "sketchpinv/io.hpp"
#include "sketchpinv/solvers.hpp"

#include <benchmark/benchmark.h>

#include <map>

namespace sp = sketchpinv;

namespace {

// Tall rank-deficient matrix shaped like the flop-comparison experiments.
const sp::DenseMatrix& tall(benchmark::State& state) {
  static std::map<std::pair<long, long>, sp::DenseMatrix> cache;
  const auto key = std::make_pair(static_cast<long>(state.range(0)), static_cast<long>(state.range(1)));
  auto it = cache.find(key);
  if (it == cache.end()) {
    const sp::Index m = key.first, n = key.second;
    it = cache.emplace(key, sp::gen_gaussian_rank_r(m, n, n * 4 / 5, 0)).first;
  }
  return it->second;
}

void BM_SataxStep(benchmark::State& state) {
  const sp::DenseMatrix& A = tall(state);
  const sp::Index tau = state.range(2);
  sp::Rng rng(1);
  sp::DenseMatrix X = sp::init_satax(A);
  for (auto _ : state) {
    X = sp::satax_step(A, X, sp::sample_uniform_batch(A.cols(), tau, rng));
    benchmark::DoNotOptimize(X.data());
  }
}
BENCHMARK(BM_SataxStep)->Args({2000, 25, 5})->Args({500, 100, 10})->Args({500, 100, 50});

void BM_SataxAdaptiveStep(benchmark::State& state) {
  const sp::DenseMatrix& A = tall(state);
  const sp::Index tau = state.range(2);
  sp::Rng rng(1);
  sp::DenseMatrix X = sp::init_satax(A);
  for (auto _ : state) {
    X = sp::satax_step(A, X, sp::sample_adaptive(X, tau, rng));
    benchmark::DoNotOptimize(X.data());
  }
}
BENCHMARK(BM_SataxAdaptiveStep)->Args({2000, 25, 5})->Args({500, 100, 10});

void BM_SaxasStep(benchmark::State& state) {
  const sp::Index n = state.range(0), tau = state.range(1);
  const sp::DenseMatrix A = sp::gen_sym_rank_r(n, n / 2, 0);
  sp::Rng rng(1);
  sp::DenseMatrix X = sp::init_saxas(A);
  for (auto _ : state) {
    X = sp::saxas_step(A, X, sp::sample_uniform_batch(n, tau, rng));
    benchmark::DoNotOptimize(X.data());
  }
}
BENCHMARK(BM_SaxasStep)->Args({100, 10})->Args({200, 20});

void BM_NewtonSchulzStep(benchmark::State& state) {
  const sp::DenseMatrix& A = tall(state);
  sp::DenseMatrix X = sp::init_newton_schulz(A);
  for (auto _ : state) {
    X = sp::newton_schulz_step(A, X);
    benchmark::DoNotOptimize(X.data());
  }
}
BENCHMARK(BM_NewtonSchulzStep)->Args({2000, 25, 0})->Args({500, 100, 0});

void BM_PinvExact(benchmark::State& state) {
  const sp::DenseMatrix& A = tall(state);
  for (auto _ : state) {
    sp::DenseMatrix P = sp::pinv_exact(A);
    benchmark::DoNotOptimize(P.data());
  }
}
BENCHMARK(BM_PinvExact)->Args({2000, 25, 0})->Args({500, 100, 0});

}  // namespace

BENCHMARK_MAIN();
