#include "emotioncarrier/pipeline.hpp"

#include <thread>

#include <nlohmann/json.hpp>

#include "num_format.hpp"

namespace emoc {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json stats_to_json(const std::optional<ChannelStats>& stats) {
  if (!stats) return nullptr;
  const auto num = [](const std::optional<double>& v) -> ordered_json {
    if (!v) return nullptr;
    return *v;
  };
  ordered_json j;
  j["mean"] = num(stats->mean);
  j["std"] = num(stats->stddev);
  j["slope_per_min"] = num(stats->slope_per_min);
  j["time_corr"] = num(stats->time_corr);
  j["stabilization"] = num(stats->stabilization);
  j["missing_fraction"] = stats->missing_fraction;
  j["samples"] = stats->samples;
  return j;
}

}  // namespace

Result<SessionAnalysis, StatError> analyze_session(const Session& session,
                                                   const AnalyzeOptions& opts) {
  auto tl = align(session, opts.calibration.lookup(session.device_id), opts.align);
  if (!tl.ok()) return StatError{StatErrorKind::degenerate_session};
  auto metrics = session_metrics(tl.value(), opts.metrics);
  if (!metrics.ok()) return metrics.error();

  SessionAnalysis out;
  out.timeline = std::move(tl).value();
  out.metrics = std::move(metrics).value();
  out.verdict = classify(out.metrics, opts.thresholds);
  return out;
}

std::vector<Session> segment_frames(std::span<const SensorFrame> frames,
                                    const SegmenterConfig& cfg, const std::string& participant) {
  std::map<std::string, DeviceSegmenter> segmenters;
  std::vector<SessionEvent> events;
  for (const SensorFrame& f : frames) {
    auto it = segmenters.find(f.device_id);
    if (it == segmenters.end()) {
      it = segmenters.emplace(f.device_id, DeviceSegmenter(cfg, f.device_id, participant)).first;
    }
    it->second.feed(f, events);
  }
  for (auto& [device, seg] : segmenters) seg.finish(events);

  std::vector<Session> sessions;
  for (SessionEvent& ev : events) {
    if (ev.kind == SessionEvent::Kind::closed) sessions.push_back(std::move(ev.session));
  }
  std::sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
    if (a.start_ts_ms != b.start_ts_ms) return a.start_ts_ms < b.start_ts_ms;
    return a.session_id < b.session_id;
  });
  return sessions;
}

Result<CohortTable, StoreError> aggregate_store(const SessionStore& store,
                                                const AnalyzeOptions& opts,
                                                const ListFilter& filter) {
  auto listed = store.list_sessions(filter);
  if (!listed.ok()) return listed.error();

  CohortTable table;
  int index = 0;
  for (const SessionSummary& summary : listed.value()) {
    auto session = store.load_session(summary.session_id);
    if (!session.ok()) return session.error();

    CohortRow row;
    row.session_index = index;
    row.session_id = summary.session_id;

    SessionMetrics metrics;
    metrics.session_id = summary.session_id;
    if (auto analysis = analyze_session(session.value(), opts); analysis.ok()) {
      metrics = std::move(analysis).value().metrics;
      for (Channel c : all_channels()) {
        const auto& stats = metrics.channel(c);
        if (stats) {
          row.mean[channel_index(c)] = stats->mean;
          row.stabilization[channel_index(c)] = stats->stabilization;
        }
      }
    }
    table.rows.push_back(std::move(row));
    table.metrics.push_back(std::move(metrics));
    ++index;
  }
  return table;
}

std::string cohort_csv(const CohortTable& table) {
  std::string csv =
      "session_index,mean_pressure_gf,mean_audio_rms,mean_heart_rate,mean_respiratory_rate,"
      "stab_pressure_gf,stab_audio_rms,stab_heart_rate,stab_respiratory_rate\n";
  const auto cell = [](const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string();
  };
  for (const CohortRow& row : table.rows) {
    csv += std::to_string(row.session_index);
    for (const auto& m : row.mean) csv += "," + cell(m);
    for (const auto& s : row.stabilization) csv += "," + cell(s);
    csv += "\n";
  }
  return csv;
}

CohortContext build_cohort_context(std::span<const SessionMetrics> sessions, int window) {
  CohortContext ctx;
  ctx.window = window;
  const size_t n = sessions.size();
  const size_t begin = n > static_cast<size_t>(window) ? n - static_cast<size_t>(window) : 0;
  const auto tail = sessions.subspan(begin);
  for (Channel c : all_channels()) {
    const std::string scalar = std::string(metric_channel_name(c)) + ".mean";
    if (auto trend = cohort_trend(tail, scalar); trend.ok()) {
      ctx.trends.push_back(std::move(trend).value());
    }
  }
  return ctx;
}

std::string session_metrics_json(const SessionMetrics& metrics, const CalmingVerdict* verdict) {
  ordered_json doc;
  doc["v"] = 1;
  doc["session_id"] = metrics.session_id;
  doc["duration_s"] = metrics.duration_s;
  if (verdict != nullptr) {
    ordered_json v;
    v["overall"] = std::string(verdict_name(verdict->verdict));
    ordered_json rules;
    rules["heart_rate"] = std::string(rule_sign_name(verdict->hr_rule));
    rules["respiratory_rate"] = std::string(rule_sign_name(verdict->rr_rule));
    rules["audio_rms"] = std::string(rule_sign_name(verdict->audio_rule));
    v["rules"] = std::move(rules);
    v["missing_inputs"] = verdict->missing_inputs;
    doc["verdict"] = std::move(v);
  }
  ordered_json channels;
  for (Channel c : all_channels()) {
    channels[std::string(metric_channel_name(c))] = stats_to_json(metrics.channel(c));
  }
  doc["channels"] = std::move(channels);
  return doc.dump();
}

std::string timeline_csv(const AlignedTimeline& tl) {
  std::string csv = "t_ms,pressure_gf,audio_rms,heart_rate,respiratory_rate\n";
  for (size_t i = 0; i < tl.grid_size(); ++i) {
    csv += std::to_string(tl.grid_ts(i));
    for (Channel c : all_channels()) {
      const auto& cell = tl.channel_cells(c)[i];
      csv += ",";
      if (cell) csv += detail::format_double(*cell);
    }
    csv += "\n";
  }
  return csv;
}

bool wait_for_sessions(const SessionStore& store, size_t count,
                       std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    auto listed = store.list_sessions();
    if (listed.ok() && listed.value().size() >= count) return true;
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace emoc
