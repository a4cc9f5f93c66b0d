#include <benchmark/benchmark.h>

#include "corrnoise/loss.hpp"
#include "corrnoise/optimizer.hpp"
#include "corrnoise/sensitivity.hpp"

using namespace corrnoise;

namespace {

void BM_MinSepDp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> rewards(n);
  for (int t = 0; t < n; ++t) rewards[t] = 1.0 + (t % 7) * 0.25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(minsep_sensitivity_dp(rewards, 16, n / 16));
  }
}
BENCHMARK(BM_MinSepDp)->Arg(1024)->Arg(16384);

void BM_ToeplitzClosedForm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const std::vector<double> coeffs = optimal_toeplitz_coeffs(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        toeplitz_minsep_closed_form(coeffs, n, 16, n / 16));
  }
}
BENCHMARK(BM_ToeplitzClosedForm)->Arg(1024)->Arg(16384);

void BM_ToeplitzFastLoss(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const std::vector<double> workload(n, 1.0);
  const std::vector<double> coeffs = optimal_toeplitz_coeffs(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(toeplitz_fast_loss(workload, coeffs, n));
  }
}
BENCHMARK(BM_ToeplitzFastLoss)->Arg(256)->Arg(4096);

void BM_BltInvert(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::vector<double> alpha(d), lambda(d);
  for (int i = 0; i < d; ++i) {
    alpha[i] = 0.5 / d;
    lambda[i] = 0.1 + 0.85 * i / std::max(1, d - 1);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(blt_invert(alpha, lambda));
  }
}
BENCHMARK(BM_BltInvert)->Arg(2)->Arg(4)->Arg(8);

void BM_OptimizeBlt(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  OptimizerConfig config;
  config.max_iterations = 600;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        optimize_blt(WorkloadSpec::prefix(n), n, 4,
                     ParticipationSchema::single(), LossObjective::kMaxLoss,
                     config));
  }
}
BENCHMARK(BM_OptimizeBlt)->Unit(benchmark::kMillisecond)->Arg(256)->Arg(4096);

void BM_OptimizeDense(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  OptimizerConfig config;
  config.max_iterations = 600;
  config.gradient_tolerance = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        optimize_dense_streaming(WorkloadSpec::prefix(n), n, config));
  }
}
BENCHMARK(BM_OptimizeDense)->Unit(benchmark::kMillisecond)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
