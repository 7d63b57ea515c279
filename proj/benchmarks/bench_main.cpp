#include <benchmark/benchmark.h>

#include <vector>

#include "oracles.hpp"
#include "relchange/lrv.hpp"
#include "relchange/regression.hpp"
#include "relchange/simulate.hpp"
#include "relchange/testing.hpp"

using namespace relchange;

namespace {

ExcessConfig excess_for(std::size_t n) {
  ExcessConfig cfg;
  cfg.level_c = 1.8;
  cfg.knots = n;
  cfg.h_d = default_hd(n);
  return cfg;
}

void BM_VBarPruned(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const MeanFit fit = plug_in_fit(mean_model_a().mu, anchor_grid(n), 0.2);
  const std::vector<double> s2(n, 0.04);
  const ExcessConfig cfg = excess_for(n);
  for (auto _ : state) benchmark::DoNotOptimize(v_bar(fit, s2, cfg, Side::kPlus));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_VBarPruned)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

void BM_VBarNaive(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const MeanFit fit = plug_in_fit(mean_model_a().mu, anchor_grid(n), 0.2);
  const std::vector<double> s2(n, 0.04);
  const ExcessConfig cfg = excess_for(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        oracle::v_bar_naive(fit.mu_tilde, s2, 0.2, 1.8, cfg.h_d, oracle::Weights::kPlus));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_VBarNaive)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

void BM_JackknifeFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const TimeSeries s = simulate_series(mean_model_a(), error_model_i(), n, 1);
  const auto grid = anchor_grid(n);
  const Kernel k = Kernel::epanechnikov();
  for (auto _ : state) benchmark::DoNotOptimize(jackknife_fit(s, grid, 0.2, k));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_JackknifeFit)->RangeMultiplier(2)->Range(250, 4000)->Complexity();

void BM_LrvEstimate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const TimeSeries s = simulate_series(mean_model_a(), error_model_i(), n, 2);
  const LrvTuning tuning = default_tuning(n);
  const auto grid = design_grid(n);
  const Kernel k = Kernel::epanechnikov();
  for (auto _ : state) benchmark::DoNotOptimize(lrv_estimate(s, tuning.block, tuning.tau, k, grid));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LrvEstimate)->RangeMultiplier(2)->Range(500, 8000)->Complexity();

void BM_MinimalVolatility(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const TimeSeries s = simulate_series(mean_model_a(), error_model_i(), n, 3);
  const auto blocks = default_block_grid(n);
  const auto taus = default_tau_grid(n, blocks.back());
  const Kernel k = Kernel::epanechnikov();
  for (auto _ : state) benchmark::DoNotOptimize(minimal_volatility_tuning(s, blocks, taus, k));
}
BENCHMARK(BM_MinimalVolatility)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_RunTest(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const TimeSeries s = simulate_series(mean_model_a(), error_model_i(), n, 4);
  TestConfig cfg;
  cfg.level_c = 1.82;
  cfg.delta = 0.3;
  cfg.bandwidth_mode = state.range(1) ? BandwidthMode::kGcv : BandwidthMode::kFixed;
  cfg.bandwidth = 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(run_test(s, cfg));
}
BENCHMARK(BM_RunTest)
    ->ArgsProduct({{500, 2000}, {0, 1}})
    ->ArgNames({"n", "gcv"})
    ->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
