#include "emotioncarrier/segmenter.hpp"

#include <algorithm>

namespace emoc {

std::optional<std::string> config_violation(const SegmenterConfig& cfg) {
  if (!(cfg.pressure_threshold_gf > 0.0)) return "pressure_threshold_gf must be > 0";
  if (cfg.arm_count < 1) return "arm_count must be >= 1";
  if (cfg.idle_timeout_ms <= 0) return "idle_timeout_ms must be > 0";
  if (cfg.max_out_of_order_ms < 0) return "max_out_of_order_ms must be >= 0";
  if (cfg.calibration.scale_counts_per_gf == 0.0) return "calibration scale must be non-zero";
  return std::nullopt;
}

bool DeviceSegmenter::Pending::operator>(const Pending& other) const {
  if (frame.timestamp_ms != other.frame.timestamp_ms) {
    return frame.timestamp_ms > other.frame.timestamp_ms;
  }
  if (frame.channel != other.frame.channel) {
    return channel_index(frame.channel) > channel_index(other.frame.channel);
  }
  return arrival > other.arrival;
}

DeviceSegmenter::DeviceSegmenter(SegmenterConfig cfg, std::string device_id,
                                 std::string participant_id)
    : cfg_(std::move(cfg)),
      device_id_(std::move(device_id)),
      participant_id_(std::move(participant_id)) {}

FeedStatus DeviceSegmenter::feed(const SensorFrame& frame, std::vector<SessionEvent>& out) {
  counters_.frames_in++;
  if (max_seen_ts_ != INT64_MIN && frame.timestamp_ms < max_seen_ts_ - cfg_.max_out_of_order_ms) {
    counters_.stale++;
    return FeedStatus::stale;
  }
  max_seen_ts_ = std::max(max_seen_ts_, frame.timestamp_ms);
  reorder_.push(Pending{frame, arrivals_++});

  const int64_t watermark = max_seen_ts_ - cfg_.max_out_of_order_ms;
  while (!reorder_.empty() && reorder_.top().frame.timestamp_ms <= watermark) {
    SensorFrame next = reorder_.top().frame;
    reorder_.pop();
    process_in_order(next, out);
  }
  update_buffered();
  return FeedStatus::accepted;
}

void DeviceSegmenter::update_buffered() {
  counters_.buffered =
      reorder_.size() + arming_run_.size() + pressure_run_.size() + watch_buffer_.size();
}

void DeviceSegmenter::finish(std::vector<SessionEvent>& out) {
  while (!reorder_.empty()) {
    SensorFrame next = reorder_.top().frame;
    reorder_.pop();
    process_in_order(next, out);
  }
  if (phase_ == Phase::active) {
    close_session(out);
  }
  counters_.discarded += arming_run_.size() + watch_buffer_.size();
  arming_run_.clear();
  watch_buffer_.clear();
  update_buffered();
}

void DeviceSegmenter::process_in_order(const SensorFrame& f, std::vector<SessionEvent>& out) {
  if (phase_ == Phase::active && f.timestamp_ms - last_above_ts_ >= cfg_.idle_timeout_ms) {
    close_session(out);
  }

  if (f.channel == Channel::pressure_raw) {
    const double gf = calibrate_pressure(f.value, cfg_.calibration);
    const bool above = gf > cfg_.pressure_threshold_gf;

    if (phase_ == Phase::idle) {
      if (above) {
        arming_run_.push_back(f);
        if (static_cast<int>(arming_run_.size()) >= cfg_.arm_count) {
          open_session(out);
        }
      } else {
        counters_.discarded += arming_run_.size() + 1;
        arming_run_.clear();
      }
    } else {
      pressure_run_.push_back(f);
      if (above) last_above_ts_ = f.timestamp_ms;
    }
  } else {
    watch_buffer_.push_back(f);
    if (phase_ == Phase::idle) prune_watch_buffer(f.timestamp_ms);
  }
}

void DeviceSegmenter::open_session(std::vector<SessionEvent>& out) {
  phase_ = Phase::active;
  session_start_ts_ = arming_run_.front().timestamp_ms;
  last_above_ts_ = arming_run_.back().timestamp_ms;
  pressure_run_ = std::move(arming_run_);
  arming_run_.clear();

  SessionEvent ev;
  ev.kind = SessionEvent::Kind::opened;
  ev.device_id = device_id_;
  ev.start_ts_ms = session_start_ts_;
  out.push_back(std::move(ev));
}

void DeviceSegmenter::close_session(std::vector<SessionEvent>& out) {
  const int64_t end_ts = last_above_ts_;

  Session s;
  s.participant_id = participant_id_;
  s.device_id = device_id_;
  s.start_ts_ms = session_start_ts_;
  s.end_ts_ms = end_ts;
  for (Channel c : all_channels()) s.series(c).channel = c;

  // Pressure belongs to [start, end]; drop the below-threshold tail.
  ChannelSeries& pressure = s.series(Channel::pressure_raw);
  for (const SensorFrame& f : pressure_run_) {
    if (f.timestamp_ms > end_ts) {
      counters_.discarded++;
      continue;
    }
    if (!pressure.timestamps_ms.empty() && f.timestamp_ms <= pressure.timestamps_ms.back()) {
      counters_.discarded++;  // duplicate timestamp, first wins
      continue;
    }
    pressure.timestamps_ms.push_back(f.timestamp_ms);
    pressure.values.push_back(f.value);
    counters_.attached++;
  }
  pressure_run_.clear();

  // Watch channels attach within the idle-extended window; everything at or
  // before end + idle_timeout is consumed either way (a later session's
  // window cannot reach back past that point).
  const int64_t lo = session_start_ts_ - cfg_.idle_timeout_ms;
  const int64_t hi = end_ts + cfg_.idle_timeout_ms;
  while (!watch_buffer_.empty() && watch_buffer_.front().timestamp_ms <= hi) {
    const SensorFrame& f = watch_buffer_.front();
    if (f.timestamp_ms >= lo) {
      ChannelSeries& cs = s.series(f.channel);
      if (!cs.timestamps_ms.empty() && f.timestamp_ms <= cs.timestamps_ms.back()) {
        counters_.discarded++;
      } else {
        cs.timestamps_ms.push_back(f.timestamp_ms);
        cs.values.push_back(f.value);
        counters_.attached++;
      }
    } else {
      counters_.discarded++;
    }
    watch_buffer_.pop_front();
  }

  s.session_id = make_session_id(s);

  SessionEvent ev;
  ev.kind = SessionEvent::Kind::closed;
  ev.device_id = device_id_;
  ev.start_ts_ms = session_start_ts_;
  ev.session = std::move(s);
  out.push_back(std::move(ev));

  phase_ = Phase::idle;
  session_start_ts_ = 0;
  last_above_ts_ = 0;
}

void DeviceSegmenter::prune_watch_buffer(int64_t now_ts) {
  // While idle, a future session cannot start earlier than the frame being
  // processed, so anything older than idle_timeout can no longer attach.
  while (!watch_buffer_.empty() &&
         watch_buffer_.front().timestamp_ms < now_ts - cfg_.idle_timeout_ms) {
    watch_buffer_.pop_front();
    counters_.discarded++;
  }
}

}  // namespace emoc
