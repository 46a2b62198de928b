#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emotioncarrier/analytics.hpp"
#include "emotioncarrier/gateway.hpp"
#include "emotioncarrier/segmenter.hpp"
#include "emotioncarrier/simulator.hpp"
#include "emotioncarrier/store.hpp"
#include "emotioncarrier/timeline.hpp"

namespace emoc {

// Everything downstream of a Session in one bundle of knobs.
struct AnalyzeOptions {
  AlignOptions align;
  MetricsOptions metrics;
  ClassifyThresholds thresholds;
  CalibrationBook calibration;
};

struct SessionAnalysis {
  AlignedTimeline timeline;
  SessionMetrics metrics;
  CalmingVerdict verdict;
};

Result<SessionAnalysis, StatError> analyze_session(const Session& session,
                                                   const AnalyzeOptions& opts = {});

// Runs a frame stream through a per-device segmenter without any transport;
// the in-process equivalent of serving one connection then disconnecting.
std::vector<Session> segment_frames(std::span<const SensorFrame> frames,
                                    const SegmenterConfig& cfg,
                                    const std::string& participant = "anonymous");

// One row of the cross-session summary table (the per-session means and
// stabilization indices plotted against session index).
struct CohortRow {
  int session_index = 0;
  std::string session_id;
  std::array<std::optional<double>, kChannelCount> mean;
  std::array<std::optional<double>, kChannelCount> stabilization;
};

struct CohortTable {
  std::vector<CohortRow> rows;
  std::vector<SessionMetrics> metrics;  // same order as rows
};

// Loads every stored session (ordered by start time) and computes metrics.
// Sessions that fail analysis keep their row with empty cells.
Result<CohortTable, StoreError> aggregate_store(const SessionStore& store,
                                                const AnalyzeOptions& opts = {},
                                                const ListFilter& filter = {});

// CSV with header: session_index, the four means, the four stabilization
// indices. Missing values are empty fields.
std::string cohort_csv(const CohortTable& table);

// Trend context for the feedback payload: the last `window` sessions' channel
// means.
CohortContext build_cohort_context(std::span<const SessionMetrics> sessions, int window = 10);

// Stable JSON/CSV renderings used by the CLI's --json and --dump-timeline.
std::string session_metrics_json(const SessionMetrics& metrics, const CalmingVerdict* verdict);
std::string timeline_csv(const AlignedTimeline& tl);

// Polls the store until `count` sessions are indexed or the deadline passes.
bool wait_for_sessions(const SessionStore& store, size_t count,
                       std::chrono::milliseconds timeout);

}  // namespace emoc
