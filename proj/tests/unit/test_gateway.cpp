#include <doctest.h>

#include <chrono>
#include <cstdlib>

#include "emotioncarrier/gateway.hpp"
#include "support/mock_gateway.hpp"

using namespace emoc;
using testsupport::MockGateway;

namespace {

SessionMetrics fixture_metrics() {
  SessionMetrics m;
  m.session_id = "01ARZ3NDEKTSV4RRFFQ69G5FAV";
  m.duration_s = 600.0;
  ChannelStats pressure;
  pressure.mean = 12.3456789;
  pressure.stddev = 1.23456789;
  pressure.slope_per_min = 0.11111;
  pressure.stabilization = 0.456789;
  pressure.missing_fraction = 0.0;
  pressure.samples = 601;
  ChannelStats audio;
  audio.mean = 0.123456;
  audio.stabilization = 0.4;
  ChannelStats hr;
  hr.mean = 71.5;
  hr.slope_per_min = -1.5;
  ChannelStats rr;
  rr.mean = 14.25;
  rr.slope_per_min = -0.4;
  m.channels[channel_index(Channel::pressure_raw)] = pressure;
  m.channels[channel_index(Channel::audio_rms)] = audio;
  m.channels[channel_index(Channel::heart_rate)] = hr;
  m.channels[channel_index(Channel::respiratory_rate)] = rr;
  return m;
}

CalmingVerdict fixture_verdict() {
  return classify(fixture_metrics());
}

GatewayConfig fast_config(const std::string& endpoint) {
  GatewayConfig cfg;
  cfg.endpoint = endpoint;
  cfg.timeout_ms = 2000;
  cfg.max_retries = 1;
  cfg.backoff_base_ms = 40;
  return cfg;
}

}  // namespace

TEST_CASE("build_payload is deterministic and marks missing channels null") {
  const auto metrics = fixture_metrics();
  const auto verdict = fixture_verdict();
  CHECK(verdict.verdict == Verdict::calming);

  auto a = build_payload(metrics, verdict, {}, {});
  auto b = build_payload(metrics, verdict, {}, {});
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a.value().json == b.value().json);  // byte-identical
  CHECK(a.value().json.size() <= kMaxPayloadBytes);
  CHECK(a.value().json.find("\"verdict\"") != std::string::npos);
  // 4 significant digits: 12.3456789 -> 12.35
  CHECK(a.value().json.find("12.35") != std::string::npos);

  SessionMetrics no_hr = metrics;
  no_hr.channels[channel_index(Channel::heart_rate)] = std::nullopt;
  auto c = build_payload(no_hr, classify(no_hr), {}, {});
  REQUIRE(c.ok());
  CHECK(c.value().json.find("\"heart_rate\":null") != std::string::npos);
}

TEST_CASE("oversized cohort context is PayloadTooLarge") {
  CohortContext huge;
  huge.window = 1000000;
  CohortTrend t;
  t.scalar_name = "audio_rms.mean";
  for (int i = 0; i < 1000000; ++i) {
    t.session_indices.push_back(i);
    t.scalar_values.push_back(0.5);
  }
  huge.trends.push_back(std::move(t));
  auto payload = build_payload(fixture_metrics(), fixture_verdict(), huge, {});
  REQUIRE_FALSE(payload.ok());
  CHECK(payload.error().reason.find("limit") != std::string::npos);
}

TEST_CASE("extract_json_object finds the first parseable object") {
  CHECK(extract_json_object(R"({"a":1})") == R"({"a":1})");
  CHECK(extract_json_object(R"(text before {"a":{"b":"}"}} text after)") ==
        R"({"a":{"b":"}"}})");
  CHECK(extract_json_object("no braces here") == std::nullopt);
  CHECK(extract_json_object("{unbalanced") == std::nullopt);
  // skips an unparseable balanced group in favour of a later valid one
  CHECK(extract_json_object(R"({oops} then {"ok":true})") == R"({"ok":true})");
}

TEST_CASE("request_feedback parses a clean mock reply") {
  MockGateway mock(MockGateway::plain_json_reply);
  const auto payload = build_payload(fixture_metrics(), fixture_verdict(), {}, {}).value();
  auto report = request_feedback(payload, fast_config(mock.endpoint()));
  REQUIRE(report.ok());
  CHECK(report.value().source == ReportSource::llm);
  CHECK(report.value().prompt_words == std::vector<std::string>{"calm", "steady"});
  CHECK(report.value().verdict == Verdict::calming);
  CHECK(mock.requests() == 1);

  // the request carried the model and the payload as the user message
  CHECK(mock.last_request_body().find("\"model\":\"gpt-4o-mini\"") != std::string::npos);
  CHECK(mock.last_request_body().find("\"messages\"") != std::string::npos);
  CHECK(mock.last_request_body().find(payload.session_id) != std::string::npos);
}

TEST_CASE("request_feedback extracts JSON embedded in prose") {
  MockGateway mock(MockGateway::prose_wrapped_reply);
  const auto payload = build_payload(fixture_metrics(), fixture_verdict(), {}, {}).value();
  auto report = request_feedback(payload, fast_config(mock.endpoint()));
  REQUIRE(report.ok());
  CHECK(report.value().prompt_words == std::vector<std::string>{"present"});
}

TEST_CASE("bad replies are unparseable_reply errors") {
  MockGateway mock([](const std::string&) { return "I feel great about your session!"; });
  const auto payload = build_payload(fixture_metrics(), fixture_verdict(), {}, {}).value();
  auto report = request_feedback(payload, fast_config(mock.endpoint()));
  REQUIRE_FALSE(report.ok());
  CHECK(report.error().kind == GatewayErrorKind::unparseable_reply);

  // too many prompt words fails report validation
  MockGateway wordy([](const std::string&) {
    return R"({"prompt_words":["a","b","c","d","e","f"],"narrative":"x"})";
  });
  auto rejected = request_feedback(payload, fast_config(wordy.endpoint()));
  REQUIRE_FALSE(rejected.ok());
  CHECK(rejected.error().kind == GatewayErrorKind::unparseable_reply);
}

TEST_CASE("non-200 statuses surface as bad_status") {
  MockGateway mock(MockGateway::plain_json_reply);
  mock.set_status(500);
  const auto payload = build_payload(fixture_metrics(), fixture_verdict(), {}, {}).value();
  auto cfg = fast_config(mock.endpoint());
  auto report = request_feedback(payload, cfg);
  REQUIRE_FALSE(report.ok());
  CHECK(report.error().kind == GatewayErrorKind::bad_status);
  CHECK(report.error().status == 500);
  CHECK(mock.requests() == 1 + cfg.max_retries);  // 5xx retried

  mock.set_status(401);
  const int before = mock.requests();
  auto unauthorized = request_feedback(payload, cfg);
  REQUIRE_FALSE(unauthorized.ok());
  CHECK(unauthorized.error().status == 401);
  CHECK(mock.requests() == before + 1);  // 4xx not retried
}

TEST_CASE("unreachable endpoints retry with backoff then fail typed") {
  const auto payload = build_payload(fixture_metrics(), fixture_verdict(), {}, {}).value();
  GatewayConfig cfg = fast_config("http://127.0.0.1:1");  // nothing listens on port 1
  cfg.max_retries = 2;
  cfg.backoff_base_ms = 50;

  const auto start = std::chrono::steady_clock::now();
  auto report = request_feedback(payload, cfg);
  const auto elapsed = std::chrono::steady_clock::now() - start;

  REQUIRE_FALSE(report.ok());
  CHECK(report.error().kind == GatewayErrorKind::unreachable);
  // backoff schedule 50 + 100 ms must have been honoured
  CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() >= 150);
  // and the whole affair stays within (1 + retries) * timeout + backoff, with slack
  CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() <=
        3 * cfg.timeout_ms + 150 + 1000);
}

TEST_CASE("the api key goes into the header and nowhere else") {
  ::setenv("EMOTIONCARRIER_API_KEY", "sk-test-secret-123", 1);
  MockGateway mock(MockGateway::plain_json_reply);
  const auto payload = build_payload(fixture_metrics(), fixture_verdict(), {}, {}).value();
  auto report = request_feedback(payload, fast_config(mock.endpoint()));
  REQUIRE(report.ok());
  CHECK(mock.last_authorization() == "Bearer sk-test-secret-123");
  CHECK(payload.json.find("sk-test-secret") == std::string::npos);
  CHECK(mock.last_request_body().find("sk-test-secret") == std::string::npos);
  CHECK(report_to_json(report.value()).find("sk-test-secret") == std::string::npos);
  ::unsetenv("EMOTIONCARRIER_API_KEY");
}

TEST_CASE("template_feedback is deterministic and verdict-keyed") {
  const auto metrics = fixture_metrics();
  const auto calming = fixture_verdict();
  const auto a = template_feedback(metrics, calming);
  const auto b = template_feedback(metrics, calming);
  CHECK(a == b);
  CHECK(a.source == ReportSource::template_fallback);
  REQUIRE_FALSE(a.prompt_words.empty());
  CHECK(std::find(a.prompt_words.begin(), a.prompt_words.end(), "calm") !=
        a.prompt_words.end());
  CHECK(a.prompt_words.size() <= 5);
  CHECK(a.narrative.size() <= 600);
  CHECK_FALSE(report_violation(a).has_value());

  SessionMetrics agitated_metrics = metrics;
  auto& hr = agitated_metrics.channels[channel_index(Channel::heart_rate)];
  hr->slope_per_min = 1.5;
  auto& rr = agitated_metrics.channels[channel_index(Channel::respiratory_rate)];
  rr->slope_per_min = 0.4;
  auto& audio = agitated_metrics.channels[channel_index(Channel::audio_rms)];
  audio->stabilization = 3.0;
  const auto agitated_verdict = classify(agitated_metrics);
  CHECK(agitated_verdict.verdict == Verdict::agitated);
  const auto r = template_feedback(agitated_metrics, agitated_verdict);
  CHECK(std::find(r.prompt_words.begin(), r.prompt_words.end(), "take a breath") !=
        r.prompt_words.end());

  SessionMetrics neutral_metrics = metrics;
  neutral_metrics.channels[channel_index(Channel::heart_rate)]->slope_per_min = 0.0;
  const auto n = template_feedback(neutral_metrics, classify(neutral_metrics));
  CHECK(std::find(n.prompt_words.begin(), n.prompt_words.end(), "settling") !=
        n.prompt_words.end());
}

TEST_CASE("reports survive their JSON round-trip") {
  FeedbackReport r;
  r.session_id = "s";
  r.prompt_words = {"calm"};
  r.narrative = "ok";
  r.source = ReportSource::llm;
  r.verdict = Verdict::calming;
  auto back = report_from_json(report_to_json(r));
  REQUIRE(back.ok());
  CHECK(back.value() == r);

  CHECK_FALSE(report_from_json("{}").ok());
  CHECK_FALSE(report_from_json("garbage").ok());
}
