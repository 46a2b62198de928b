#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "emotioncarrier/session.hpp"
#include "emotioncarrier/telemetry.hpp"

namespace emoc {

struct SegmenterConfig {
  double pressure_threshold_gf = 5.0;   // > 0
  int arm_count = 3;                    // >= 1 consecutive samples to open
  int64_t idle_timeout_ms = 30000;      // > 0, silence that closes a session
  CalibrationProfile calibration;       // counts -> gram-force for thresholding
  int64_t max_out_of_order_ms = 2000;   // >= 0 reordering window
};

std::optional<std::string> config_violation(const SegmenterConfig& cfg);

struct SessionEvent {
  enum class Kind { opened, closed };
  Kind kind = Kind::opened;
  std::string device_id;
  int64_t start_ts_ms = 0;
  Session session;  // populated for closed events only
};

enum class FeedStatus { accepted, stale };

struct SegmenterCounters {
  uint64_t frames_in = 0;
  uint64_t stale = 0;
  uint64_t attached = 0;    // frames that ended up inside a closed session
  uint64_t discarded = 0;   // valid frames outside any session window
  uint64_t buffered = 0;    // currently waiting (reorder + watch + open session)
};

// Per-device session segmenter.
//
// Frames are admitted through a bounded reordering stage: a frame older than
// max_out_of_order_ms relative to the newest timestamp seen is stale; anything
// newer waits in a priority queue and is processed once the watermark
// (newest - window) passes it, which guarantees in-timestamp-order processing.
//
// The state machine itself reads only frame timestamps and calibrated pressure
// values, never the wall clock, so segmentation is a pure function of the
// frame sequence:
//   IDLE   -> ACTIVE  after arm_count consecutive above-threshold pressure
//             samples; the session starts at the first of them.
//   ACTIVE -> IDLE    once any processed frame's timestamp is idle_timeout_ms
//             past the last above-threshold pressure sample; the session ends
//             at that last above-threshold sample.
// Non-pressure frames buffer until a session closes and attach when they fall
// in [start - idle_timeout, end + idle_timeout]; the earliest closing session
// wins a frame in the rare window overlap between adjacent sessions.
class DeviceSegmenter {
 public:
  DeviceSegmenter(SegmenterConfig cfg, std::string device_id,
                  std::string participant_id = "anonymous");

  FeedStatus feed(const SensorFrame& frame, std::vector<SessionEvent>& out);

  // Drains the reorder buffer and closes any open session at the last
  // above-threshold sample (stream-end close).
  void finish(std::vector<SessionEvent>& out);

  void set_participant(std::string participant) { participant_id_ = std::move(participant); }
  const std::string& participant() const { return participant_id_; }
  const std::string& device() const { return device_id_; }
  const SegmenterCounters& counters() const { return counters_; }
  bool active() const { return phase_ == Phase::active; }

 private:
  enum class Phase { idle, active };

  struct Pending {
    SensorFrame frame;
    uint64_t arrival = 0;
    bool operator>(const Pending& other) const;
  };

  void process_in_order(const SensorFrame& f, std::vector<SessionEvent>& out);
  void close_session(std::vector<SessionEvent>& out);
  void open_session(std::vector<SessionEvent>& out);
  void prune_watch_buffer(int64_t now_ts);
  void update_buffered();

  SegmenterConfig cfg_;
  std::string device_id_;
  std::string participant_id_;

  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> reorder_;
  uint64_t arrivals_ = 0;
  int64_t max_seen_ts_ = INT64_MIN;

  Phase phase_ = Phase::idle;
  std::vector<SensorFrame> arming_run_;   // consecutive above-threshold samples, < arm_count
  std::vector<SensorFrame> pressure_run_; // pressure frames of the open session
  std::deque<SensorFrame> watch_buffer_;  // non-pressure frames awaiting attachment
  int64_t session_start_ts_ = 0;
  int64_t last_above_ts_ = 0;

  SegmenterCounters counters_;
};

}  // namespace emoc
