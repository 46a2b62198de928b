#include "emotioncarrier/session.hpp"

#include <algorithm>
#include <cstdio>

#include "emotioncarrier/rng.hpp"
#include "num_format.hpp"

namespace emoc {

size_t Session::frame_count() const {
  size_t n = 0;
  for (const auto& s : channels) n += s.size();
  return n;
}

std::optional<std::string> session_violation(const Session& s, int64_t attach_margin_ms) {
  if (s.session_id.empty()) return "session_id is empty";
  if (s.start_ts_ms > s.end_ts_ms) return "start_ts_ms > end_ts_ms";
  if (s.series(Channel::pressure_raw).empty()) return "pressure_raw series is empty";
  for (Channel c : all_channels()) {
    const ChannelSeries& cs = s.series(c);
    if (cs.channel != c) return "channel slot mismatch";
    if (cs.timestamps_ms.size() != cs.values.size()) return "series length mismatch";
    const bool is_pressure = c == Channel::pressure_raw;
    const int64_t lo = s.start_ts_ms - (is_pressure ? 0 : attach_margin_ms);
    const int64_t hi = s.end_ts_ms + (is_pressure ? 0 : attach_margin_ms);
    int64_t prev = INT64_MIN;
    for (size_t i = 0; i < cs.size(); ++i) {
      if (cs.timestamps_ms[i] <= prev) return "timestamps not strictly increasing";
      prev = cs.timestamps_ms[i];
      if (cs.timestamps_ms[i] < lo || cs.timestamps_ms[i] > hi) {
        return std::string(channel_name(c)) + " sample outside session window";
      }
      if (!value_in_range(c, cs.values[i])) {
        return std::string(channel_name(c)) + " value out of range";
      }
    }
  }
  return std::nullopt;
}

namespace {

constexpr char kCrockford[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

void encode_base32(uint64_t bits, int chars, std::string& out) {
  for (int i = chars - 1; i >= 0; --i) {
    out += kCrockford[(bits >> (5 * i)) & 0x1F];
  }
}

uint64_t hash_series(const ChannelSeries& cs, uint64_t h) {
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(cs.timestamps_ms.data()),
                               cs.timestamps_ms.size() * sizeof(int64_t)),
              h);
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(cs.values.data()),
                               cs.values.size() * sizeof(double)),
              h);
  return h;
}

}  // namespace

std::string make_session_id(const Session& s) {
  uint64_t h = fnv1a64(s.device_id);
  h = fnv1a64(s.participant_id, h);
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&s.start_ts_ms), 8), h);
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&s.end_ts_ms), 8), h);
  for (const auto& cs : s.channels) h = hash_series(cs, h);

  SplitMix64 g(h);
  const uint64_t time_part = static_cast<uint64_t>(s.start_ts_ms) & 0xFFFFFFFFFFFFull;
  std::string id;
  id.reserve(26);
  encode_base32(time_part, 10, id);           // 48 bits of start timestamp
  encode_base32(g.next(), 8, id);             // 40 bits entropy
  encode_base32(g.next() & 0xFFFFFFFFFFull, 8, id);  // 40 bits entropy
  return id;
}

std::vector<SensorFrame> session_frames(const Session& s) {
  std::vector<SensorFrame> out;
  out.reserve(s.frame_count());
  for (Channel c : all_channels()) {
    const ChannelSeries& cs = s.series(c);
    for (size_t i = 0; i < cs.size(); ++i) {
      SensorFrame f;
      f.device_id = s.device_id;
      f.channel = c;
      f.timestamp_ms = cs.timestamps_ms[i];
      f.value = cs.values[i];
      out.push_back(std::move(f));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const SensorFrame& a, const SensorFrame& b) {
    if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
    return channel_index(a.channel) < channel_index(b.channel);
  });
  return out;
}

}  // namespace emoc
