// Micro benchmarks for the hot paths: DTW, warper inference and one
// per-signal training step. Run with --benchmark_filter=... to narrow down.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "warpalign/baselines.hpp"
#include "warpalign/losses.hpp"
#include "warpalign/pipeline.hpp"

using namespace warpalign;

namespace {

Series noise_series(std::size_t len, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  std::vector<double> v(len);
  for (auto& x : v) x = dist(gen);
  return Series::univariate(std::move(v));
}

void BM_Dtw(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto x = noise_series(len, 1);
  const auto y = noise_series(len, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dtw_distance(x.row(0), y.row(0)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dtw)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNSquared);

void BM_InferWarp(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  NetConfig cfg;
  cfg.input_len = len;
  const auto net = init_network(cfg, 1);
  const auto x = noise_series(len, 3);
  for (auto _ : state) benchmark::DoNotOptimize(infer_warp(net, x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_InferWarp)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMicrosecond);

// One update on one signal against a working set of `range(1)` members.
void BM_TrainStep(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto members = static_cast<std::size_t>(state.range(1));
  NetConfig cfg;
  cfg.input_len = len;
  auto net = init_network(cfg, 1);
  std::vector<Series> working;
  for (std::size_t i = 0; i < members; ++i) working.push_back(noise_series(len, 10 + i));
  const LossConfig loss;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto sl = signal_loss(net, working, i++ % members, loss, true);
    net.step(sl.grads, 1e-3);
  }
}
BENCHMARK(BM_TrainStep)->Args({128, 10})->Args({128, 50})->Args({256, 10})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
