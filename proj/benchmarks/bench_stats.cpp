#include <benchmark/benchmark.h>

#include <vector>

#include "emotioncarrier/analytics.hpp"
#include "emotioncarrier/rng.hpp"

using namespace emoc;

namespace {

std::vector<double> noise(size_t n, uint64_t seed) {
  NormalSampler sampler(seed);
  std::vector<double> out(n);
  for (double& v : out) v = sampler.next();
  return out;
}

void BM_Pearson(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const auto x = noise(n, 1);
  const auto y = noise(n, 2);
  for (auto _ : state) {
    auto r = pearson(x, y);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Pearson)->Arg(64)->Arg(601)->Arg(4096);

void BM_Linreg(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  std::vector<double> t(n);
  for (size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
  const auto y = noise(n, 3);
  for (auto _ : state) {
    auto fit = linreg(t, y);
    benchmark::DoNotOptimize(fit);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Linreg)->Arg(64)->Arg(601)->Arg(4096);

void BM_RollingStd(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const auto y = noise(n, 4);
  for (auto _ : state) {
    auto rolled = rolling_std(y, 30);
    benchmark::DoNotOptimize(rolled);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_RollingStd)->Arg(601)->Arg(4096);

void BM_StabilizationIndex(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const auto y = noise(n, 5);
  for (auto _ : state) {
    auto idx = stabilization_index(std::span<const double>(y), 30);
    benchmark::DoNotOptimize(idx);
  }
}
BENCHMARK(BM_StabilizationIndex)->Arg(601)->Arg(4096);

}  // namespace
