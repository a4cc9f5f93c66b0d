#include <benchmark/benchmark.h>

#include "corrnoise/noisegen.hpp"

using namespace corrnoise;

namespace {

constexpr int kDim = 1024;  // model dimension per noise row

void BM_BandedNext(benchmark::State& state) {
  const int bands = static_cast<int>(state.range(0));
  std::vector<double> coeffs(bands);
  coeffs[0] = 1.0;
  for (int j = 1; j < bands; ++j) coeffs[j] = 0.5 / j;
  const Strategy strategy = Strategy::banded_toeplitz(1 << 20, coeffs);
  NoiseSource source{42, 1.0, kDim};
  auto gen = make_noise_generator(strategy, source);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen->next());
  }
  state.SetItemsProcessed(state.iterations() * kDim);
}
BENCHMARK(BM_BandedNext)->Arg(2)->Arg(8)->Arg(32)->Arg(128);

void BM_BltNext(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::vector<double> alpha(d), lambda(d);
  for (int i = 0; i < d; ++i) {
    alpha[i] = 0.5 / d;
    lambda[i] = 1.0 - 1.0 / (2 << i);
  }
  const Strategy strategy = Strategy::blt(1 << 20, alpha, lambda);
  NoiseSource source{42, 1.0, kDim};
  auto gen = make_noise_generator(strategy, source);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen->next());
  }
  state.SetItemsProcessed(state.iterations() * kDim);
}
BENCHMARK(BM_BltNext)->Arg(1)->Arg(4)->Arg(8);

void BM_TreeNext(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Strategy strategy = Strategy::tree(n, TreeVariant::kBasic);
  NoiseSource source{42, 1.0, kDim};
  auto gen = make_noise_generator(strategy, source);
  std::int64_t emitted = 0;
  for (auto _ : state) {
    if (emitted == n) {  // streams are finite; restart outside the timer
      state.PauseTiming();
      gen = make_noise_generator(strategy, source);
      emitted = 0;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(gen->next());
    ++emitted;
  }
  state.SetItemsProcessed(state.iterations() * kDim);
}
BENCHMARK(BM_TreeNext)->Arg(1024)->Arg(8192);

// The dense per-step cost grows with t; stream whole horizons.
void BM_DenseStream(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Strategy strategy =
      Strategy::toeplitz(n, optimal_toeplitz_coeffs(n));
  NoiseSource source{42, 1.0, kDim};
  for (auto _ : state) {
    auto gen = make_noise_generator(strategy, source);
    for (int t = 0; t < n; ++t) benchmark::DoNotOptimize(gen->next());
  }
  state.SetItemsProcessed(state.iterations() * n * kDim);
}
BENCHMARK(BM_DenseStream)->Arg(64)->Arg(256);

void BM_RegenerateRow(benchmark::State& state) {
  NoiseSource source{42, 1.0, static_cast<int>(state.range(0))};
  std::int64_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(regenerate_row(source, t++));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RegenerateRow)->Arg(1024)->Arg(65536);

}  // namespace
