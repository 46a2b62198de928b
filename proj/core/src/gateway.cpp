#include "emotioncarrier/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "num_format.hpp"

namespace emoc {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kSystemPrompt =
    "You are a mindfulness feedback assistant. You receive one JSON document "
    "describing a calligraphy writing session: brush pressure, ambient "
    "breathing/movement noise, heart rate and respiratory rate statistics, a "
    "calming/neutral/agitated verdict, and recent-session trends. Reply with "
    "exactly one JSON object and nothing else: {\"prompt_words\": [1 to 5 "
    "short encouraging words or phrases], \"narrative\": \"one warm paragraph "
    "of at most 600 characters reflecting the session\"}.";

ordered_json stats_json(const std::optional<ChannelStats>& stats) {
  if (!stats) return nullptr;
  const auto num = [](const std::optional<double>& v) -> ordered_json {
    if (!v) return nullptr;
    return detail::round_sig(*v, 4);
  };
  ordered_json j;
  j["mean"] = num(stats->mean);
  j["std"] = num(stats->stddev);
  j["slope_per_min"] = num(stats->slope_per_min);
  j["time_corr"] = num(stats->time_corr);
  j["stabilization"] = num(stats->stabilization);
  j["missing_fraction"] = detail::round_sig(stats->missing_fraction, 4);
  return j;
}

// Splits "scheme://host:port/prefix" into client base and path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const size_t scheme = endpoint.find("://");
  const size_t path_start =
      endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  std::string prefix = endpoint.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {endpoint.substr(0, path_start), prefix};
}

}  // namespace

std::optional<std::string> config_violation(const GatewayConfig& cfg) {
  if (cfg.endpoint.empty()) return "endpoint is empty";
  if (cfg.timeout_ms <= 0) return "timeout_ms must be > 0";
  if (cfg.max_retries < 0) return "max_retries must be >= 0";
  if (cfg.backoff_base_ms < 0) return "backoff_base_ms must be >= 0";
  return std::nullopt;
}

Result<GatewayConfig, std::string> load_gateway_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::string("cannot open gateway config: ") + path;
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return std::string("gateway config is not a JSON object");
  }
  GatewayConfig cfg;
  cfg.endpoint = doc.value("endpoint", "");
  cfg.model = doc.value("model", cfg.model);
  cfg.timeout_ms = doc.value("timeout_ms", cfg.timeout_ms);
  cfg.max_retries = doc.value("max_retries", cfg.max_retries);
  cfg.backoff_base_ms = doc.value("backoff_base_ms", cfg.backoff_base_ms);
  cfg.api_key_env = doc.value("api_key_env", cfg.api_key_env);
  if (auto why = config_violation(cfg)) return *why;
  return cfg;
}

Result<FeedbackPayload, PayloadError> build_payload(const SessionMetrics& metrics,
                                                    const CalmingVerdict& verdict,
                                                    const CohortContext& cohort,
                                                    const DeviceInfo& devices) {
  ordered_json doc;
  doc["v"] = 1;
  doc["session_id"] = metrics.session_id;

  ordered_json dev;
  dev["installation"] = devices.installation_model;
  dev["watch"] = devices.watch_model;
  doc["devices"] = std::move(dev);

  ordered_json verdict_json;
  verdict_json["overall"] = std::string(verdict_name(verdict.verdict));
  ordered_json rules;
  rules["heart_rate"] = std::string(rule_sign_name(verdict.hr_rule));
  rules["respiratory_rate"] = std::string(rule_sign_name(verdict.rr_rule));
  rules["audio_rms"] = std::string(rule_sign_name(verdict.audio_rule));
  verdict_json["rules"] = std::move(rules);
  verdict_json["missing_inputs"] = verdict.missing_inputs;
  doc["verdict"] = std::move(verdict_json);

  ordered_json m;
  m["duration_s"] = detail::round_sig(metrics.duration_s, 4);
  for (Channel c : all_channels()) {
    m[std::string(metric_channel_name(c))] = stats_json(metrics.channel(c));
  }
  doc["metrics"] = std::move(m);

  ordered_json cohort_json;
  cohort_json["window"] = cohort.window;
  ordered_json trends = ordered_json::array();
  for (const CohortTrend& t : cohort.trends) {
    ordered_json tj;
    tj["scalar"] = t.scalar_name;
    tj["r"] = detail::round_sig(t.cross_session_r, 4);
    tj["slope_per_session"] = detail::round_sig(t.cross_session_slope, 4);
    ordered_json values = ordered_json::array();
    for (double v : t.scalar_values) values.push_back(detail::round_sig(v, 4));
    tj["values"] = std::move(values);
    trends.push_back(std::move(tj));
  }
  cohort_json["trends"] = std::move(trends);
  doc["cohort"] = std::move(cohort_json);

  FeedbackPayload payload;
  payload.session_id = metrics.session_id;
  payload.verdict = verdict.verdict;
  payload.json = doc.dump();
  if (payload.json.size() > kMaxPayloadBytes) {
    return PayloadError{"payload is " + std::to_string(payload.json.size()) +
                        " bytes, limit " + std::to_string(kMaxPayloadBytes)};
  }
  return payload;
}

std::string_view gateway_error_name(GatewayErrorKind kind) {
  switch (kind) {
    case GatewayErrorKind::unreachable: return "unreachable";
    case GatewayErrorKind::timeout: return "timeout";
    case GatewayErrorKind::bad_status: return "bad_status";
    case GatewayErrorKind::unparseable_reply: return "unparseable_reply";
  }
  return "?";
}

std::optional<std::string> report_violation(const FeedbackReport& r) {
  if (r.session_id.empty()) return "session_id is empty";
  if (r.prompt_words.empty() || r.prompt_words.size() > 5) {
    return "prompt_words must hold 1..5 entries";
  }
  for (const auto& w : r.prompt_words) {
    if (w.empty()) return "prompt word is empty";
  }
  if (r.narrative.size() > 600) return "narrative longer than 600 chars";
  return std::nullopt;
}

std::optional<std::string> extract_json_object(std::string_view text) {
  for (size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < text.size(); ++i) {
      const char ch = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (ch == '\\') {
          escaped = true;
        } else if (ch == '"') {
          in_string = false;
        }
        continue;
      }
      if (ch == '"') {
        in_string = true;
      } else if (ch == '{') {
        ++depth;
      } else if (ch == '}') {
        if (--depth == 0) {
          std::string_view candidate = text.substr(start, i - start + 1);
          const auto parsed = nlohmann::json::parse(candidate, nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) {
            return std::string(candidate);
          }
          break;  // balanced but unparseable; try the next '{'
        }
      }
    }
  }
  return std::nullopt;
}

namespace {

Result<FeedbackReport, GatewayError> parse_reply(const std::string& body,
                                                 const FeedbackPayload& payload) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return GatewayError{GatewayErrorKind::unparseable_reply, 0, "response is not JSON"};
  }
  std::string content;
  try {
    content = doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return GatewayError{GatewayErrorKind::unparseable_reply, 0,
                        "no choices[0].message.content in response"};
  }

  const auto object_text = extract_json_object(content);
  if (!object_text) {
    return GatewayError{GatewayErrorKind::unparseable_reply, 0,
                        "no JSON object in reply text"};
  }
  const auto reply = nlohmann::json::parse(*object_text, nullptr, false);

  FeedbackReport report;
  report.session_id = payload.session_id;
  report.verdict = payload.verdict;
  report.source = ReportSource::llm;
  if (!reply.contains("prompt_words") || !reply["prompt_words"].is_array() ||
      !reply.contains("narrative") || !reply["narrative"].is_string()) {
    return GatewayError{GatewayErrorKind::unparseable_reply, 0,
                        "reply object missing prompt_words/narrative"};
  }
  for (const auto& w : reply["prompt_words"]) {
    if (!w.is_string()) {
      return GatewayError{GatewayErrorKind::unparseable_reply, 0, "non-string prompt word"};
    }
    report.prompt_words.push_back(w.get<std::string>());
  }
  report.narrative = reply["narrative"].get<std::string>();
  if (auto why = report_violation(report)) {
    return GatewayError{GatewayErrorKind::unparseable_reply, 0, *why};
  }
  return report;
}

}  // namespace

Result<FeedbackReport, GatewayError> request_feedback(const FeedbackPayload& payload,
                                                      const GatewayConfig& cfg) {
  if (auto why = config_violation(cfg)) {
    return GatewayError{GatewayErrorKind::unreachable, 0, *why};
  }

  ordered_json body;
  body["model"] = cfg.model;
  ordered_json messages = ordered_json::array();
  ordered_json system_msg;
  system_msg["role"] = "system";
  system_msg["content"] = kSystemPrompt;
  messages.push_back(std::move(system_msg));
  ordered_json user_msg;
  user_msg["role"] = "user";
  user_msg["content"] = payload.json;
  messages.push_back(std::move(user_msg));
  body["messages"] = std::move(messages);
  const std::string body_text = body.dump();

  const auto [base, prefix] = split_endpoint(cfg.endpoint);
  const std::string path = prefix + "/v1/chat/completions";

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  GatewayError last{GatewayErrorKind::unreachable, 0, "no attempt made"};
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0 && cfg.backoff_base_ms > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(cfg.backoff_base_ms * (1 << (attempt - 1))));
    }

    httplib::Client client(base);
    client.set_connection_timeout(0, cfg.timeout_ms * 1000);
    client.set_read_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);
    client.set_write_timeout(cfg.timeout_ms / 1000, (cfg.timeout_ms % 1000) * 1000);

    auto res = client.Post(path, headers, body_text, "application/json");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
          err == httplib::Error::Write) {
        last = GatewayError{GatewayErrorKind::timeout, 0, httplib::to_string(err)};
      } else {
        last = GatewayError{GatewayErrorKind::unreachable, 0, httplib::to_string(err)};
      }
      continue;
    }
    if (res->status != 200) {
      last = GatewayError{GatewayErrorKind::bad_status, res->status,
                          "HTTP " + std::to_string(res->status)};
      // 4xx will not improve on retry.
      if (res->status >= 400 && res->status < 500) return last;
      continue;
    }
    return parse_reply(res->body, payload);
  }
  return last;
}

FeedbackReport template_feedback(const SessionMetrics& metrics, const CalmingVerdict& verdict) {
  FeedbackReport report;
  report.session_id = metrics.session_id;
  report.verdict = verdict.verdict;
  report.source = ReportSource::template_fallback;

  const auto slope_of = [&metrics](Channel c) -> std::optional<double> {
    const auto& stats = metrics.channel(c);
    return stats ? stats->slope_per_min : std::nullopt;
  };
  const auto stab_of = [&metrics](Channel c) -> std::optional<double> {
    const auto& stats = metrics.channel(c);
    return stats ? stats->stabilization : std::nullopt;
  };

  if (verdict.verdict == Verdict::calming) {
    // Rule margins decide the word order: the strongest signal speaks first.
    const ClassifyThresholds t;
    struct Candidate {
      double margin;
      const char* word;
    };
    Candidate candidates[] = {
        {slope_of(Channel::heart_rate) ? -(*slope_of(Channel::heart_rate)) - t.hr_slope_min : 0.0,
         "calm"},
        {slope_of(Channel::respiratory_rate)
             ? -(*slope_of(Channel::respiratory_rate)) - t.rr_slope_min
             : 0.0,
         "steady"},
        {stab_of(Channel::audio_rms) ? t.stab_max - *stab_of(Channel::audio_rms) : 0.0,
         "present"},
    };
    std::stable_sort(std::begin(candidates), std::end(candidates),
                     [](const Candidate& a, const Candidate& b) { return a.margin > b.margin; });
    for (const auto& c : candidates) report.prompt_words.emplace_back(c.word);
  } else if (verdict.verdict == Verdict::agitated) {
    report.prompt_words = {"restless", "take a breath"};
  } else {
    report.prompt_words = {"settling", "continuing"};
  }

  const auto fmt = [](std::optional<double> v) -> std::string {
    if (!v) return "n/a";
    return detail::format_double(detail::round_sig(*v, 3));
  };
  std::string text = "Over " + fmt(metrics.duration_s / 60.0) + " minutes of writing, heart rate "
                     "trended " + fmt(slope_of(Channel::heart_rate)) + " bpm/min and breathing " +
                     fmt(slope_of(Channel::respiratory_rate)) + " breaths/min per minute, while "
                     "ambient noise settled to " + fmt(stab_of(Channel::audio_rms)) +
                     " of its early level. The session reads as " +
                     std::string(verdict_name(verdict.verdict)) + ".";
  if (text.size() > 600) text.resize(600);
  report.narrative = std::move(text);
  return report;
}

std::string report_to_json(const FeedbackReport& report) {
  ordered_json j;
  j["v"] = 1;
  j["session_id"] = report.session_id;
  j["source"] = std::string(report_source_name(report.source));
  j["verdict"] = std::string(verdict_name(report.verdict));
  j["prompt_words"] = report.prompt_words;
  j["narrative"] = report.narrative;
  return j.dump();
}

Result<FeedbackReport, std::string> report_from_json(std::string_view text) {
  const auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::string("report is not a JSON object");
  FeedbackReport r;
  try {
    r.session_id = doc.at("session_id").get<std::string>();
    r.narrative = doc.at("narrative").get<std::string>();
    for (const auto& w : doc.at("prompt_words")) r.prompt_words.push_back(w.get<std::string>());
    const std::string source = doc.at("source").get<std::string>();
    if (source == "llm") {
      r.source = ReportSource::llm;
    } else if (source == "template") {
      r.source = ReportSource::template_fallback;
    } else {
      return std::string("unknown report source: ") + source;
    }
    const std::string verdict = doc.at("verdict").get<std::string>();
    if (verdict == "calming") {
      r.verdict = Verdict::calming;
    } else if (verdict == "agitated") {
      r.verdict = Verdict::agitated;
    } else if (verdict == "neutral") {
      r.verdict = Verdict::neutral;
    } else {
      return std::string("unknown verdict: ") + verdict;
    }
  } catch (const nlohmann::json::exception& e) {
    return std::string("bad report fields: ") + e.what();
  }
  if (auto why = report_violation(r)) return *why;
  return r;
}

}  // namespace emoc
