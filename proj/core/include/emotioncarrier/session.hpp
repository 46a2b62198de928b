#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emotioncarrier/telemetry.hpp"

namespace emoc {

// One channel's samples within a session, timestamp-sorted.
struct ChannelSeries {
  Channel channel = Channel::pressure_raw;
  std::vector<int64_t> timestamps_ms;  // strictly increasing
  std::vector<double> values;          // same length, within channel range

  size_t size() const { return timestamps_ms.size(); }
  bool empty() const { return timestamps_ms.empty(); }

  bool operator==(const ChannelSeries&) const = default;
};

// A segmented multi-channel recording of one writing sitting. start/end are
// the pressure-activity bounds; non-pressure samples may extend up to the
// segmenter's idle timeout on either side (they are kept so the aligned grid
// has context at the edges).
struct Session {
  std::string session_id;
  std::string participant_id;
  std::string device_id;
  int64_t start_ts_ms = 0;
  int64_t end_ts_ms = 0;
  std::array<ChannelSeries, kChannelCount> channels;

  const ChannelSeries& series(Channel c) const { return channels[channel_index(c)]; }
  ChannelSeries& series(Channel c) { return channels[channel_index(c)]; }

  size_t frame_count() const;

  bool operator==(const Session&) const = default;
};

// nullopt when structurally valid. attach_margin_ms is how far non-pressure
// samples may lie outside [start, end] (the segmenter's idle timeout).
std::optional<std::string> session_violation(const Session& s, int64_t attach_margin_ms);

// ULID-style 26-char sortable id: 48-bit start timestamp + 80 bits derived
// from a content hash, Crockford base32. Deterministic: the same session
// content always maps to the same id, so replays reproduce ids.
std::string make_session_id(const Session& s);

// Flattens a session back to wire frames in global timestamp order (seq
// omitted). Used by the store format and replays.
std::vector<SensorFrame> session_frames(const Session& s);

}  // namespace emoc
