#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "emotioncarrier/result.hpp"

namespace emoc {

// The four telemetry channels: brush pressure in raw 24-bit converter counts,
// ambient breathing/movement noise as an RMS level, and the two watch vitals.
enum class Channel : int {
  pressure_raw = 0,
  audio_rms = 1,
  heart_rate = 2,
  respiratory_rate = 3,
};

inline constexpr int kChannelCount = 4;

constexpr std::array<Channel, kChannelCount> all_channels() {
  return {Channel::pressure_raw, Channel::audio_rms, Channel::heart_rate,
          Channel::respiratory_rate};
}

constexpr int channel_index(Channel c) { return static_cast<int>(c); }

std::string_view channel_name(Channel c);
std::optional<Channel> channel_from_name(std::string_view name);

// Valid value interval per channel. Bounds are stored closed; channels with
// open physiological bounds (heart_rate, respiratory_rate) have them nudged
// inward by one ulp so that `lo <= v && v <= hi` is the whole validity test.
struct ChannelRange {
  double lo;
  double hi;
};

ChannelRange channel_range(Channel c);
bool value_in_range(Channel c, double v);
double clamp_to_range(Channel c, double v);

// One timestamped sample on one channel from one device; the wire unit.
struct SensorFrame {
  int protocol_version = 1;
  std::string device_id;        // 1..64 chars
  Channel channel = Channel::pressure_raw;
  int64_t timestamp_ms = 0;     // ms since Unix epoch, >= 0
  double value = 0.0;           // finite, within channel_range
  std::optional<uint64_t> seq;  // per (device, channel) monotonic counter

  bool operator==(const SensorFrame&) const = default;
};

inline constexpr size_t kMaxDeviceIdLen = 64;

// nullopt when every invariant holds, otherwise a short description of the
// first violation.
std::optional<std::string> frame_violation(const SensorFrame& f);

struct EncodeError {
  std::string reason;
};

// Encodes one frame as a single LF-terminated JSON line with keys emitted in
// exactly the order v, device, ch, ts, val[, seq] and no whitespace.
// Integral values are written without a fraction part; everything else uses
// the shortest representation that parses back to the same double.
Result<std::string, EncodeError> encode_frame(const SensorFrame& f);

enum class DecodeErrorKind {
  malformed_line,       // not a JSON object, or required keys missing/mistyped
  unsupported_version,  // v present and integral but != 1
  unknown_channel,      // ch is not one of the four channel names
  range_violation,      // value/timestamp/device/seq outside its domain
};

struct DecodeError {
  DecodeErrorKind kind;
  std::string detail;
};

std::string_view decode_error_name(DecodeErrorKind kind);

// Parses one wire line. Any key order and whitespace is accepted; unknown
// keys are ignored. A trailing newline is tolerated.
Result<SensorFrame, DecodeError> decode_frame(std::string_view line);

// Load-cell tare/scale model converting raw converter counts to gram-force.
struct CalibrationProfile {
  std::string device_id;
  double offset_counts = 0.0;
  double scale_counts_per_gf = 1.0;  // != 0

  CalibrationProfile() = default;
  // Throws std::invalid_argument when scale is zero or non-finite.
  CalibrationProfile(std::string device, double offset, double scale);
};

inline double calibrate_pressure(double raw_counts, const CalibrationProfile& p) {
  return (raw_counts - p.offset_counts) / p.scale_counts_per_gf;
}

// Per-device calibration profiles with a fallback for unlisted devices.
struct CalibrationBook {
  CalibrationProfile fallback{"*", 5880.0, 420.0};
  std::map<std::string, CalibrationProfile> by_device;

  const CalibrationProfile& lookup(std::string_view device) const;

  // File format: {"default":{"offset_counts":..,"scale_counts_per_gf":..},
  //               "devices":{"<id>":{...}, ...}}  (both parts optional)
  static Result<CalibrationBook, std::string> load(const std::filesystem::path& file);
};

}  // namespace emoc
