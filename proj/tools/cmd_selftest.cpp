#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>

#include "emotioncarrier/ingest.hpp"
#include "emotioncarrier/replay.hpp"
#include "emotioncarrier/simulator.hpp"

#include "commands.hpp"
#include "common.hpp"

namespace emoctool {

namespace {

using emoc::Channel;

struct SelftestArgs {
  uint64_t seed = 7;
  int sessions = 30;
  std::string keep_store;  // when set, artifacts stay here
};

std::optional<double> median_slope(const std::vector<emoc::SessionMetrics>& metrics, Channel c) {
  std::vector<double> slopes;
  for (const auto& m : metrics) {
    const auto& stats = m.channel(c);
    if (stats && stats->slope_per_min) slopes.push_back(*stats->slope_per_min);
  }
  if (slopes.empty()) return std::nullopt;
  std::sort(slopes.begin(), slopes.end());
  const size_t mid = slopes.size() / 2;
  if (slopes.size() % 2 == 1) return slopes[mid];
  return 0.5 * (slopes[mid - 1] + slopes[mid]);
}

bool check(const char* label, double value, const char* relation, double bound, bool pass) {
  std::printf("%-34s %+9.4f  (expected %s %g)  %s\n", label, value, relation, bound,
              pass ? "PASS" : "FAIL");
  return pass;
}

void run(const SelftestArgs& args) {
  const bool keep = !args.keep_store.empty();
  const std::filesystem::path store_dir =
      keep ? std::filesystem::path(args.keep_store)
           : std::filesystem::temp_directory_path() /
                 ("emoc-selftest-" + std::to_string(::getpid()));

  std::printf("selftest: %d-session calming cohort, seed %llu\n", args.sessions,
              static_cast<unsigned long long>(args.seed));

  // simulate -> ingest over loopback TCP -> store
  const auto cohort = emoc::generate_cohort(emoc::calming_cohort(args.sessions, args.seed));
  {
    auto store = open_writer(store_dir.string());
    emoc::IngestService service(store, emoc::SegmenterConfig{
                                           .calibration = emoc::CalibrationBook{}.fallback});
    auto port = service.start("127.0.0.1", 0);
    if (!port.ok()) fail(port.error().message);
    size_t persisted = 0;
    for (const auto& s : cohort) {
      emoc::ReplayOptions opts;
      opts.max_speed = true;
      opts.participant = s.recipe.profile.participant_id;
      auto sent = emoc::stream_frames(s.frames, "127.0.0.1", port.value(), opts);
      if (!sent.ok()) fail("stream failed: " + sent.error().message);
      // one connection per sitting; wait for its session before the next one
      if (!emoc::wait_for_sessions(store, ++persisted, std::chrono::seconds(30))) {
        fail("ingest did not persist session " + std::to_string(persisted) + " in time");
      }
    }
    service.stop();
  }

  // analyze + aggregate
  auto store = open_reader(store_dir.string());
  auto table = emoc::aggregate_store(store, {});
  if (!table.ok()) fail(table.error().detail);
  const auto& metrics = table.value().metrics;
  if (static_cast<int>(metrics.size()) != args.sessions) fail("session count mismatch");

  bool all_pass = true;

  const auto pressure_trend = emoc::cohort_trend(metrics, "pressure_gf.mean");
  if (!pressure_trend.ok()) fail("pressure trend unavailable");
  all_pass &= check("pressure mean trend r", pressure_trend.value().cross_session_r, ">", 0.5,
                    pressure_trend.value().cross_session_r > 0.5);

  const auto audio_trend = emoc::cohort_trend(metrics, "audio_rms.mean");
  if (!audio_trend.ok()) fail("audio trend unavailable");
  all_pass &= check("audio noise trend r", audio_trend.value().cross_session_r, "<", -0.5,
                    audio_trend.value().cross_session_r < -0.5);

  const auto hr = median_slope(metrics, Channel::heart_rate);
  if (!hr) fail("no heart-rate slopes");
  all_pass &= check("median heart-rate slope/min", *hr, "<", 0.0, *hr < 0.0);

  const auto rr = median_slope(metrics, Channel::respiratory_rate);
  if (!rr) fail("no respiratory-rate slopes");
  all_pass &= check("median respiratory slope/min", *rr, "<", 0.0, *rr < 0.0);

  int calming = 0;
  for (const auto& m : metrics) {
    if (emoc::classify(m).verdict == emoc::Verdict::calming) ++calming;
  }
  std::printf("%-34s %3d/%d  %s\n", "sessions classified calming", calming, args.sessions,
              calming * 10 >= args.sessions * 9 ? "PASS" : "FAIL");
  all_pass &= calming * 10 >= args.sessions * 9;

  // offline feedback for the newest session
  const auto report = emoc::template_feedback(metrics.back(), emoc::classify(metrics.back()));
  const bool report_ok = !emoc::report_violation(report).has_value();
  std::printf("%-34s %zu word(s)  %s\n", "offline feedback report", report.prompt_words.size(),
              report_ok ? "PASS" : "FAIL");
  all_pass &= report_ok;

  if (!keep) {
    std::error_code ec;
    std::filesystem::remove_all(store_dir, ec);
  } else {
    std::printf("selftest: artifacts kept at %s\n", store_dir.string().c_str());
  }

  if (!all_pass) fail("selftest found failing trends");
  std::printf("selftest: all checks passed\n");
}

}  // namespace

void register_selftest(CLI::App& app, int& exit_code) {
  auto args = std::make_shared<SelftestArgs>();
  CLI::App* cmd = app.add_subcommand(
      "selftest", "Seeded end-to-end run: simulate -> ingest -> analyze -> report");
  cmd->add_option("--seed", args->seed, "Cohort seed")->capture_default_str();
  cmd->add_option("--sessions", args->sessions, "Cohort size")->capture_default_str();
  cmd->add_option("--keep-store", args->keep_store, "Keep pipeline artifacts in this directory");
  cmd->callback([args, &exit_code] { exit_code = guarded("selftest", [&] { run(*args); }); });
}

}  // namespace emoctool
