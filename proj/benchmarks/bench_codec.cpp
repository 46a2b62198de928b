#include <benchmark/benchmark.h>

#include <vector>

#include "emotioncarrier/rng.hpp"
#include "emotioncarrier/telemetry.hpp"

using namespace emoc;

namespace {

std::vector<SensorFrame> sample_frames(size_t n) {
  SplitMix64 rng(42);
  std::vector<SensorFrame> frames;
  frames.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    SensorFrame f;
    f.device_id = "carrier-01";
    f.channel = all_channels()[rng.next() % kChannelCount];
    f.timestamp_ms = static_cast<int64_t>(1700000000000ull + i * 100);
    const auto range = channel_range(f.channel);
    f.value = range.lo + rng.next_unit() * (range.hi - range.lo);
    f.seq = i;
    frames.push_back(std::move(f));
  }
  return frames;
}

void BM_EncodeFrame(benchmark::State& state) {
  const auto frames = sample_frames(1024);
  size_t i = 0;
  for (auto _ : state) {
    auto line = encode_frame(frames[i++ & 1023]);
    benchmark::DoNotOptimize(line);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EncodeFrame);

void BM_DecodeFrame(benchmark::State& state) {
  const auto frames = sample_frames(1024);
  std::vector<std::string> lines;
  for (const auto& f : frames) lines.push_back(encode_frame(f).value());
  size_t i = 0;
  for (auto _ : state) {
    auto frame = decode_frame(lines[i++ & 1023]);
    benchmark::DoNotOptimize(frame);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DecodeFrame);

}  // namespace

BENCHMARK_MAIN();
