#include <benchmark/benchmark.h>

#include "emotioncarrier/pipeline.hpp"
#include "emotioncarrier/simulator.hpp"

using namespace emoc;

namespace {

void BM_GenerateSession(benchmark::State& state) {
  SimProfile p = calming_profile();
  p.session_duration_s = static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto frames = generate_session(p);
    benchmark::DoNotOptimize(frames);
  }
}
BENCHMARK(BM_GenerateSession)->Arg(60)->Arg(600);

void BM_SegmentSession(benchmark::State& state) {
  SimProfile p = calming_profile();
  p.session_duration_s = static_cast<double>(state.range(0));
  const auto frames = generate_session(p);
  SegmenterConfig cfg;
  cfg.calibration = CalibrationBook{}.fallback;
  for (auto _ : state) {
    auto sessions = segment_frames(frames, cfg);
    benchmark::DoNotOptimize(sessions);
  }
  state.SetItemsProcessed(state.iterations() * frames.size());
}
BENCHMARK(BM_SegmentSession)->Arg(60)->Arg(600);

void BM_AlignAndMetrics(benchmark::State& state) {
  SimProfile p = calming_profile();
  p.session_duration_s = static_cast<double>(state.range(0));
  const auto frames = generate_session(p);
  SegmenterConfig cfg;
  cfg.calibration = CalibrationBook{}.fallback;
  const auto sessions = segment_frames(frames, cfg);
  for (auto _ : state) {
    auto analysis = analyze_session(sessions.front(), {});
    benchmark::DoNotOptimize(analysis);
  }
}
BENCHMARK(BM_AlignAndMetrics)->Arg(60)->Arg(600);

}  // namespace
