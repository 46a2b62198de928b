#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emotioncarrier/analytics.hpp"
#include "emotioncarrier/result.hpp"

namespace emoc {

struct DeviceInfo {
  std::string installation_model = "emotioncarrier/0.1";
  std::string watch_model = "simwatch/0.1";
};

struct GatewayConfig {
  std::string endpoint;  // base URL, e.g. "http://127.0.0.1:8080"
  std::string model = "gpt-4o-mini";
  int timeout_ms = 15000;     // > 0, per attempt
  int max_retries = 2;        // >= 0 retries after the first attempt
  int backoff_base_ms = 250;  // exponential: base * 2^attempt between tries
  std::string api_key_env = "EMOTIONCARRIER_API_KEY";
};

std::optional<std::string> config_violation(const GatewayConfig& cfg);
Result<GatewayConfig, std::string> load_gateway_config(const std::string& path);

// Cross-session context sent alongside the metrics; the last `window`
// sessions' values per tracked scalar.
struct CohortContext {
  int window = 10;
  std::vector<CohortTrend> trends;
};

inline constexpr size_t kMaxPayloadBytes = 32 * 1024;

// The JSON document submitted to the chat endpoint. Deterministic: stable
// field order, numbers rounded to 4 significant digits.
struct FeedbackPayload {
  std::string session_id;
  Verdict verdict = Verdict::neutral;
  std::string json;
};

struct PayloadError {
  std::string reason;
};

Result<FeedbackPayload, PayloadError> build_payload(const SessionMetrics& metrics,
                                                    const CalmingVerdict& verdict,
                                                    const CohortContext& cohort,
                                                    const DeviceInfo& devices);

enum class GatewayErrorKind { unreachable, timeout, bad_status, unparseable_reply };

struct GatewayError {
  GatewayErrorKind kind;
  int status = 0;
  std::string detail;
};

std::string_view gateway_error_name(GatewayErrorKind kind);

enum class ReportSource { llm, template_fallback };

inline std::string_view report_source_name(ReportSource s) {
  return s == ReportSource::llm ? "llm" : "template";
}

struct FeedbackReport {
  std::string session_id;
  std::vector<std::string> prompt_words;  // 1..5 short strings
  std::string narrative;                  // <= 600 chars
  ReportSource source = ReportSource::template_fallback;
  Verdict verdict = Verdict::neutral;

  bool operator==(const FeedbackReport&) const = default;
};

std::optional<std::string> report_violation(const FeedbackReport& r);

// POSTs {endpoint}/v1/chat/completions with the payload as the user message
// and parses the first JSON object found in the reply into a report. Every
// failure mode maps to a typed error so callers can fall back to the
// template; nothing here throws on network trouble.
Result<FeedbackReport, GatewayError> request_feedback(const FeedbackPayload& payload,
                                                      const GatewayConfig& cfg);

// Deterministic offline fallback keyed on the verdict and rule margins.
FeedbackReport template_feedback(const SessionMetrics& metrics, const CalmingVerdict& verdict);

// First balanced {...} group in free text that parses as a JSON object.
std::optional<std::string> extract_json_object(std::string_view text);

std::string report_to_json(const FeedbackReport& report);
Result<FeedbackReport, std::string> report_from_json(std::string_view text);

}  // namespace emoc
