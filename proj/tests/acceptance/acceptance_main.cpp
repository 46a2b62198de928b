// Acceptance suite: one function per criterion, one PASS/FAIL line each.
//
//   acceptance_suite        run all criteria
//   acceptance_suite N      run criterion N only
//
// Criterion 7 drives the real CLI binary; set EMOC_CLI to its path (ctest
// does this automatically).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emotioncarrier/ingest.hpp"
#include "emotioncarrier/pipeline.hpp"
#include "emotioncarrier/replay.hpp"
#include "emotioncarrier/rng.hpp"
#include "emotioncarrier/simulator.hpp"
#include "support/generators.hpp"
#include "support/malformed_corpus.hpp"
#include "support/mock_gateway.hpp"
#include "support/oracles.hpp"
#include "support/subprocess.hpp"
#include "support/temp_dir.hpp"

using namespace emoc;
using Clock = std::chrono::steady_clock;

#define ACHECK(cond)                                                          \
  do {                                                                        \
    if (!(cond)) {                                                            \
      std::printf("       failed: %s (%s:%d)\n", #cond, __FILE__, __LINE__);  \
      return false;                                                           \
    }                                                                         \
  } while (0)

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SegmenterConfig default_segmenter() {
  SegmenterConfig cfg;
  cfg.calibration = CalibrationBook{}.fallback;
  return cfg;
}

// Shared by criteria 2-4: the seeded calming cohort pushed through
// segmentation and analytics.
std::vector<SessionMetrics> calming_cohort_metrics(int n, uint64_t seed) {
  std::vector<SessionMetrics> metrics;
  for (const auto& s : generate_cohort(calming_cohort(n, seed))) {
    for (const auto& session : segment_frames(s.frames, default_segmenter())) {
      if (auto analysis = analyze_session(session, {}); analysis.ok()) {
        metrics.push_back(std::move(analysis).value().metrics);
      }
    }
  }
  return metrics;
}

// --- criterion 1 -----------------------------------------------------------

bool criterion1() {
  const auto t0 = Clock::now();
  SplitMix64 rng(0xACCE97);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 2 + rng.next() % 199;
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = (rng.next_unit() - 0.5) * 2000.0;
      y[i] = (rng.next_unit() - 0.5) * 2000.0;
    }

    const auto lib_r = pearson(x, y);
    const auto ref_r = oracle::pearson(x, y);
    ACHECK(lib_r.ok() == ref_r.has_value());
    if (ref_r) ACHECK(std::abs(lib_r.value() - *ref_r) <= 1e-9);

    const auto lib_fit = linreg(x, y);
    const auto ref_fit = oracle::ols(x, y);
    ACHECK(lib_fit.ok() == ref_fit.has_value());
    if (ref_fit) {
      ACHECK(std::abs(lib_fit.value().slope_per_min - ref_fit->slope_per_s * 60.0) <= 1e-9);
      ACHECK(std::abs(lib_fit.value().intercept - ref_fit->intercept) <= 1e-9);
    }

    const size_t window = 2 + rng.next() % (n - 1);  // within [2, n]
    const auto lib_roll = rolling_std(y, window);
    const auto ref_roll = oracle::rolling_std(y, window);
    ACHECK(lib_roll.ok());
    ACHECK(lib_roll.value().size() == ref_roll.size());
    for (size_t i = 0; i < ref_roll.size(); ++i) {
      ACHECK(std::abs(lib_roll.value()[i] - ref_roll[i]) <= 1e-9);
    }
  }
  const double elapsed = seconds_since(t0);
  std::printf("       1000 random arrays agreed within 1e-9 in %.2f s\n", elapsed);
  ACHECK(elapsed < 5.0);
  return true;
}

// --- criterion 2 -----------------------------------------------------------

bool criterion2() {
  const auto t0 = Clock::now();
  const auto metrics = calming_cohort_metrics(30, 7);
  ACHECK(metrics.size() == 30);

  const auto trend = cohort_trend(metrics, "pressure_gf.mean");
  ACHECK(trend.ok());
  std::printf("       r(session index, mean pressure) = %+.4f\n", trend.value().cross_session_r);
  ACHECK(trend.value().cross_session_r > 0.5);

  int stabilizing = 0;
  for (const auto& m : metrics) {
    const auto& p = m.channel(Channel::pressure_raw);
    if (p && p->stabilization && *p->stabilization < 1.0) ++stabilizing;
  }
  std::printf("       pressure stabilization < 1 in %d/30 sessions\n", stabilizing);
  ACHECK(stabilizing * 10 >= 30 * 8);  // >= 80%

  const double elapsed = seconds_since(t0);
  std::printf("       cohort run took %.2f s\n", elapsed);
  ACHECK(elapsed < 10.0);
  return true;
}

// --- criterion 3 -----------------------------------------------------------

bool criterion3() {
  const auto metrics = calming_cohort_metrics(30, 7);
  ACHECK(metrics.size() == 30);

  const auto trend = cohort_trend(metrics, "audio_rms.mean");
  ACHECK(trend.ok());
  std::printf("       r(session index, mean audio) = %+.4f\n", trend.value().cross_session_r);
  ACHECK(trend.value().cross_session_r < -0.5);

  int stabilizing = 0;
  for (const auto& m : metrics) {
    const auto& a = m.channel(Channel::audio_rms);
    if (a && a->stabilization && *a->stabilization < 1.0) ++stabilizing;
  }
  std::printf("       audio stabilization < 1 in %d/30 sessions\n", stabilizing);
  ACHECK(stabilizing * 10 >= 30 * 8);
  return true;
}

// --- criterion 4 -----------------------------------------------------------

bool criterion4() {
  const auto metrics = calming_cohort_metrics(30, 7);
  ACHECK(metrics.size() == 30);

  const auto median_of = [&metrics](Channel c) {
    std::vector<double> slopes;
    for (const auto& m : metrics) {
      const auto& stats = m.channel(c);
      if (stats && stats->slope_per_min) slopes.push_back(*stats->slope_per_min);
    }
    std::sort(slopes.begin(), slopes.end());
    return slopes.empty() ? 0.0
           : slopes.size() % 2
               ? slopes[slopes.size() / 2]
               : 0.5 * (slopes[slopes.size() / 2 - 1] + slopes[slopes.size() / 2]);
  };
  const double hr_median = median_of(Channel::heart_rate);
  const double rr_median = median_of(Channel::respiratory_rate);
  std::printf("       median slopes: HR %+.3f, RR %+.3f per minute\n", hr_median, rr_median);
  ACHECK(hr_median < 0.0);
  ACHECK(rr_median < 0.0);

  int calming = 0;
  for (const auto& m : metrics) {
    if (classify(m).verdict == Verdict::calming) ++calming;
  }
  std::printf("       calming verdicts: %d/30\n", calming);
  ACHECK(calming * 10 >= 30 * 9);  // >= 90%

  int agitated = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    SimProfile p = agitated_profile();
    p.seed = seed;
    const auto sessions = segment_frames(generate_session(p), default_segmenter());
    if (sessions.size() != 1) continue;
    if (auto analysis = analyze_session(sessions[0], {}); analysis.ok()) {
      if (analysis.value().verdict.verdict == Verdict::agitated) ++agitated;
    }
  }
  std::printf("       agitated verdicts: %d/100 seeds\n", agitated);
  ACHECK(agitated >= 90);
  return true;
}

// --- criterion 5 -----------------------------------------------------------

bool criterion5() {
  SplitMix64 rng(0x3151);
  for (int i = 0; i < 10000; ++i) {
    const SensorFrame f = gen::random_frame(rng);
    const auto line = encode_frame(f);
    ACHECK(line.ok());
    const auto back = decode_frame(line.value());
    ACHECK(back.ok());
    ACHECK(std::memcmp(&back.value().value, &f.value, sizeof(double)) == 0);
    ACHECK(back.value() == f);
  }
  std::printf("       10^4 random frames round-tripped bit-exactly\n");

  const auto corpus = testsupport::malformed_corpus();
  ACHECK(corpus.size() >= 10);
  for (const auto& c : corpus) {
    const auto frame = decode_frame(c.line);
    ACHECK(!frame.ok());
    if (frame.error().kind != c.expected) {
      std::printf("       wrong error for %s: got %s\n", c.line.c_str(),
                  std::string(decode_error_name(frame.error().kind)).c_str());
      return false;
    }
  }
  std::printf("       %zu malformed lines rejected with their designated errors\n",
              corpus.size());
  return true;
}

// --- criterion 6 -----------------------------------------------------------

bool criterion6() {
  testsupport::TempDir dir("accept-replay");

  SimProfile p = calming_profile();
  p.session_duration_s = 3.0;
  p.seed = 606;
  const auto sessions = segment_frames(generate_session(p), default_segmenter());
  ACHECK(sessions.size() == 1);

  auto source = SessionStore::open_writer(dir.path() / "source");
  ACHECK(source.ok());
  ACHECK(source.value().append_session(sessions[0]).ok());
  const auto file = dir.path() / "source" / "sessions" / (sessions[0].session_id + ".jsonl");

  std::string json_1x, json_max;
  Session loaded_1x, loaded_max;
  for (const bool max_speed : {false, true}) {
    auto store = SessionStore::open_writer(dir.path() / (max_speed ? "max" : "1x"));
    ACHECK(store.ok());
    IngestService service(store.value(), default_segmenter());
    auto port = service.start("127.0.0.1", 0);
    ACHECK(port.ok());

    ReplayOptions opts;
    opts.max_speed = max_speed;
    auto stats = replay_file(file, "127.0.0.1", port.value(), opts);
    ACHECK(stats.ok());
    ACHECK(wait_for_sessions(store.value(), 1, std::chrono::seconds(30)));
    service.stop();

    auto listed = store.value().list_sessions();
    ACHECK(listed.ok());
    ACHECK(listed.value().size() == 1);
    auto session = store.value().load_session(listed.value()[0].session_id);
    ACHECK(session.ok());
    auto analysis = analyze_session(session.value(), {});
    ACHECK(analysis.ok());
    auto& json_out = max_speed ? json_max : json_1x;
    json_out = session_metrics_json(analysis.value().metrics, &analysis.value().verdict);
    (max_speed ? loaded_max : loaded_1x) = session.value();
  }

  ACHECK(loaded_1x.start_ts_ms == loaded_max.start_ts_ms);
  ACHECK(loaded_1x.end_ts_ms == loaded_max.end_ts_ms);
  ACHECK(loaded_1x == loaded_max);
  ACHECK(json_1x == json_max);  // byte-identical, ids included (content-derived)
  std::printf("       1x and max-speed replays agree byte-for-byte (%zu-byte metrics JSON)\n",
              json_1x.size());
  return true;
}

// --- criterion 7 -----------------------------------------------------------

bool criterion7() {
  const std::string cli = testsupport::cli_path();
  if (cli.empty()) {
    std::printf("       EMOC_CLI is not set; cannot drive the CLI\n");
    return false;
  }
  testsupport::TempDir dir("accept-e2e");
  const auto store_dir = dir.path() / "store";

  // simulate -> serve over loopback
  {
    auto store = SessionStore::open_writer(store_dir);
    ACHECK(store.ok());
    IngestService service(store.value(), default_segmenter());
    auto port = service.start("127.0.0.1", 0);
    ACHECK(port.ok());
    SimProfile p = calming_profile();
    p.session_duration_s = 60.0;
    p.seed = 707;
    ReplayOptions opts;
    opts.max_speed = true;
    opts.participant = "p-07";
    ACHECK(stream_frames(generate_session(p), "127.0.0.1", port.value(), opts).ok());
    ACHECK(wait_for_sessions(store.value(), 1, std::chrono::seconds(30)));
    service.stop();
  }
  auto reader = SessionStore::open_reader(store_dir);
  ACHECK(reader.ok());
  const auto listed = reader.value().list_sessions();
  ACHECK(listed.ok());
  ACHECK(listed.value().size() == 1);
  const std::string session_id = listed.value()[0].session_id;

  // live mock gateway -> source llm; the api key must reach the mock's
  // Authorization header and nothing else we emit
  const std::string secret = "sk-acceptance-secret-4242";
  ::setenv("EMOTIONCARRIER_API_KEY", secret.c_str(), 1);
  {
    testsupport::MockGateway mock(testsupport::MockGateway::plain_json_reply);
    const auto gw_config = dir.path() / "gateway.json";
    std::ofstream(gw_config) << nlohmann::json{{"endpoint", mock.endpoint()},
                                               {"model", "mock-model"},
                                               {"timeout_ms", 3000},
                                               {"max_retries", 1},
                                               {"backoff_base_ms", 50}}
                                    .dump();
    const auto run = testsupport::run_command(cli + " report --store " + store_dir.string() +
                                              " --session " + session_id + " --gateway-config " +
                                              gw_config.string() + " --json 2>" +
                                              (dir.path() / "report.stderr").string());
    ACHECK(run.exit_code == 0);
    const auto doc = nlohmann::json::parse(run.output, nullptr, false);
    ACHECK(!doc.is_discarded());
    ACHECK(doc["source"] == "llm");
    ACHECK(doc["prompt_words"].is_array());
    ACHECK(doc["prompt_words"].size() >= 1 && doc["prompt_words"].size() <= 5);
    ACHECK(mock.last_authorization() == "Bearer " + secret);
    ACHECK(run.output.find(secret) == std::string::npos);
    ACHECK(mock.last_request_body().find(secret) == std::string::npos);

    // scan everything the pipeline wrote for the secret
    int scanned = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path())) {
      if (!entry.is_regular_file()) continue;
      std::ifstream in(entry.path(), std::ios::binary);
      const std::string content((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
      if (entry.path().filename() == "gateway.json") continue;  // not an emitted artifact
      ACHECK(content.find(secret) == std::string::npos);
      ++scanned;
    }
    std::printf("       live gateway: source=llm, %zu prompt word(s); %d artifacts secret-free\n",
                doc["prompt_words"].size(), scanned);
  }
  ::unsetenv("EMOTIONCARRIER_API_KEY");

  // unreachable gateway -> template fallback, exit 0, bounded added latency
  {
    const auto gw_config = dir.path() / "gateway-down.json";
    const int timeout_ms = 1000;
    const int max_retries = 2;
    std::ofstream(gw_config) << nlohmann::json{{"endpoint", "http://127.0.0.1:1"},
                                               {"model", "mock-model"},
                                               {"timeout_ms", timeout_ms},
                                               {"max_retries", max_retries},
                                               {"backoff_base_ms", 50}}
                                    .dump();
    const auto t0 = Clock::now();
    const auto run = testsupport::run_command(cli + " report --store " + store_dir.string() +
                                              " --session " + session_id + " --gateway-config " +
                                              gw_config.string() + " --json");
    const double elapsed = seconds_since(t0);
    ACHECK(run.exit_code == 0);
    const auto doc = nlohmann::json::parse(run.output, nullptr, false);
    ACHECK(!doc.is_discarded());
    ACHECK(doc["source"] == "template");
    ACHECK(doc["prompt_words"].size() >= 1 && doc["prompt_words"].size() <= 5);
    std::printf("       dead gateway: source=template, exit 0, %.2f s elapsed\n", elapsed);
    ACHECK(elapsed <= (1 + max_retries) * (timeout_ms / 1000.0));
  }
  return true;
}

// --- criterion 8 -----------------------------------------------------------

bool criterion8() {
  // linear signal reproduced at grid points within 1e-9
  {
    Session s;
    s.session_id = "lin";
    s.participant_id = "p";
    s.device_id = "d";
    s.start_ts_ms = 0;
    s.end_ts_ms = 60000;
    for (Channel c : all_channels()) s.series(c).channel = c;
    auto& pressure = s.series(Channel::pressure_raw);
    for (int64_t t = 0; t <= 60000; t += 250) {  // off-grid cadence
      pressure.timestamps_ms.push_back(t);
      pressure.values.push_back(100.0 + 0.25 * static_cast<double>(t));
    }
    const CalibrationProfile identity("d", 0.0, 1.0);
    auto tl = align(s, identity, {});
    ACHECK(tl.ok());
    const auto& cells = tl.value().channel_cells(Channel::pressure_raw);
    ACHECK(cells.size() == 61);
    for (size_t i = 0; i < cells.size(); ++i) {
      ACHECK(cells[i].has_value());
      const double expected = 100.0 + 0.25 * static_cast<double>(tl.value().grid_ts(i));
      ACHECK(std::abs(*cells[i] - expected) <= 1e-9);
    }

    // constant in -> constant out, exactly
    Session flat = s;
    for (auto& v : flat.series(Channel::pressure_raw).values) v = 777.0;
    auto flat_tl = align(flat, identity, {});
    ACHECK(flat_tl.ok());
    for (const auto& cell : flat_tl.value().channel_cells(Channel::pressure_raw)) {
      ACHECK(cell.has_value());
      ACHECK(*cell == 777.0);
    }

    // gaps beyond max_gap go missing
    Session gappy = s;
    ChannelSeries sparse;
    sparse.channel = Channel::pressure_raw;
    for (size_t i = 0; i < pressure.size(); ++i) {
      const int64_t t = pressure.timestamps_ms[i];
      if (t <= 10000 || t >= 50000) {
        sparse.timestamps_ms.push_back(t);
        sparse.values.push_back(pressure.values[i]);
      }
    }
    gappy.series(Channel::pressure_raw) = sparse;
    auto gappy_tl = align(gappy, identity, {});
    ACHECK(gappy_tl.ok());
    const auto& gap_cells = gappy_tl.value().channel_cells(Channel::pressure_raw);
    ACHECK(!gap_cells[30].has_value());  // mid-gap, > 5 s from any sample
    ACHECK(gap_cells[5].has_value());
    ACHECK(gap_cells[55].has_value());
    std::printf("       linear/constant/gap timeline checks passed\n");
  }

  // store round-trip identity over 100 generated sessions + crash case
  {
    testsupport::TempDir dir("accept-store");
    auto store = SessionStore::open_writer(dir.path());
    ACHECK(store.ok());
    SplitMix64 rng(0xACC8);
    int stored = 0;
    for (int i = 0; i < 100; ++i) {
      Session s = gen::random_session(rng);
      auto id = store.value().append_session(s);
      ACHECK(id.ok());
      auto loaded = store.value().load_session(s.session_id);
      ACHECK(loaded.ok());
      ACHECK(loaded.value() == s);
      ++stored;
    }
    // simulated crash: temp file never renamed
    std::ofstream(dir.path() / "sessions" / "CRASHEDWRITERTEMPFILE.jsonl.tmp")
        << "{\"type\":\"session_header\"}\n";
    auto listed = store.value().list_sessions();
    ACHECK(listed.ok());
    ACHECK(static_cast<int>(listed.value().size()) == stored);
    for (const auto& summary : listed.value()) {
      ACHECK(store.value().load_session(summary.session_id).ok());
    }
    std::printf("       %d generated sessions round-tripped; crash leftover ignored\n", stored);
  }
  return true;
}

struct Criterion {
  int id;
  const char* title;
  bool (*run)();
};

constexpr Criterion kCriteria[] = {
    {1, "statistics oracle equivalence (1000 random arrays, 1e-9, < 5 s)", criterion1},
    {2, "pressure trend: cross-session r > +0.5, stabilization < 1 in >= 80%", criterion2},
    {3, "noise trend: cross-session r < -0.5, stabilization < 1 in >= 80%", criterion3},
    {4, "vitals settle: median slopes < 0, >= 90% calming; agitated mirror >= 90%", criterion4},
    {5, "wire soundness: 10^4 bit-exact round-trips, typed rejection corpus", criterion5},
    {6, "replay equivalence: 1x vs max-speed byte-identical sessions and metrics", criterion6},
    {7, "end-to-end feedback: mock gateway llm, fallback template, bounded latency", criterion7},
    {8, "timeline exactness and store round-trip with crash tolerance", criterion8},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& criterion : kCriteria) {
    if (only != 0 && criterion.id != only) continue;
    const bool ok = criterion.run();
    std::printf("%s  criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion.id, criterion.title);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
