#include "emotioncarrier/telemetry.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "num_format.hpp"

namespace emoc {

namespace {

using nlohmann::json;

constexpr double kPressureLo = -8388608.0;  // -2^23, 24-bit signed converter
constexpr double kPressureHi = 8388607.0;   //  2^23 - 1

const std::array<ChannelRange, kChannelCount>& ranges() {
  // heart_rate and respiratory_rate are open intervals; nudge the stored
  // bounds inward one ulp so closed-interval tests apply uniformly.
  static const std::array<ChannelRange, kChannelCount> r = {{
      {kPressureLo, kPressureHi},
      {0.0, 1.0},
      {std::nextafter(20.0, 1e9), std::nextafter(250.0, 0.0)},
      {std::nextafter(2.0, 1e9), std::nextafter(60.0, 0.0)},
  }};
  return r;
}

constexpr std::array<std::string_view, kChannelCount> kChannelNames = {
    "pressure_raw", "audio_rms", "heart_rate", "respiratory_rate"};

}  // namespace

std::string_view channel_name(Channel c) { return kChannelNames[channel_index(c)]; }

std::optional<Channel> channel_from_name(std::string_view name) {
  for (Channel c : all_channels()) {
    if (kChannelNames[channel_index(c)] == name) return c;
  }
  return std::nullopt;
}

ChannelRange channel_range(Channel c) { return ranges()[channel_index(c)]; }

bool value_in_range(Channel c, double v) {
  const ChannelRange r = channel_range(c);
  return std::isfinite(v) && v >= r.lo && v <= r.hi;
}

double clamp_to_range(Channel c, double v) {
  const ChannelRange r = channel_range(c);
  return std::min(std::max(v, r.lo), r.hi);
}

std::optional<std::string> frame_violation(const SensorFrame& f) {
  if (f.protocol_version != 1) return "protocol_version must be 1";
  if (f.device_id.empty()) return "device_id is empty";
  if (f.device_id.size() > kMaxDeviceIdLen) return "device_id longer than 64 chars";
  if (f.timestamp_ms < 0) return "timestamp_ms is negative";
  if (!std::isfinite(f.value)) return "value is not finite";
  if (!value_in_range(f.channel, f.value)) {
    return std::string("value out of range for ") + std::string(channel_name(f.channel));
  }
  return std::nullopt;
}

Result<std::string, EncodeError> encode_frame(const SensorFrame& f) {
  if (auto why = frame_violation(f)) return EncodeError{*why};
  std::string out = "{\"v\":1,\"device\":";
  out += json(f.device_id).dump();  // quoted + escaped, so no interior newline
  out += ",\"ch\":\"";
  out += channel_name(f.channel);
  out += "\",\"ts\":";
  out += std::to_string(f.timestamp_ms);
  out += ",\"val\":";
  out += detail::format_number(f.value);
  if (f.seq) {
    out += ",\"seq\":";
    out += std::to_string(*f.seq);
  }
  out += "}\n";
  return out;
}

std::string_view decode_error_name(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::malformed_line: return "malformed_line";
    case DecodeErrorKind::unsupported_version: return "unsupported_version";
    case DecodeErrorKind::unknown_channel: return "unknown_channel";
    case DecodeErrorKind::range_violation: return "range_violation";
  }
  return "?";
}

Result<SensorFrame, DecodeError> decode_frame(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
    line.remove_suffix(1);
  }
  const json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return DecodeError{DecodeErrorKind::malformed_line, "not a JSON object"};
  }

  const auto require = [&doc](const char* key) -> const json* {
    auto it = doc.find(key);
    return it == doc.end() ? nullptr : &*it;
  };

  const json* v = require("v");
  const json* device = require("device");
  const json* ch = require("ch");
  const json* ts = require("ts");
  const json* val = require("val");
  if (!v || !device || !ch || !ts || !val) {
    return DecodeError{DecodeErrorKind::malformed_line, "missing required key"};
  }
  if (!v->is_number_integer() && !v->is_number_unsigned()) {
    return DecodeError{DecodeErrorKind::malformed_line, "v is not an integer"};
  }
  if (!device->is_string()) {
    return DecodeError{DecodeErrorKind::malformed_line, "device is not a string"};
  }
  if (!ch->is_string()) {
    return DecodeError{DecodeErrorKind::malformed_line, "ch is not a string"};
  }
  if (!ts->is_number_integer() && !ts->is_number_unsigned()) {
    return DecodeError{DecodeErrorKind::malformed_line, "ts is not an integer"};
  }
  if (!val->is_number()) {
    return DecodeError{DecodeErrorKind::malformed_line, "val is not a number"};
  }

  if (v->get<int64_t>() != 1) {
    return DecodeError{DecodeErrorKind::unsupported_version,
                       "v=" + std::to_string(v->get<int64_t>())};
  }

  const auto channel = channel_from_name(ch->get<std::string>());
  if (!channel) {
    return DecodeError{DecodeErrorKind::unknown_channel, ch->get<std::string>()};
  }

  SensorFrame f;
  f.protocol_version = 1;
  f.device_id = device->get<std::string>();
  f.channel = *channel;
  f.value = val->get<double>();
  if (ts->is_number_unsigned() &&
      ts->get<uint64_t>() > static_cast<uint64_t>(std::numeric_limits<int64_t>::max())) {
    return DecodeError{DecodeErrorKind::range_violation, "ts overflows int64"};
  }
  f.timestamp_ms = ts->get<int64_t>();

  if (auto it = doc.find("seq"); it != doc.end()) {
    if (it->is_number_unsigned()) {
      f.seq = it->get<uint64_t>();
    } else if (it->is_number_integer()) {
      return DecodeError{DecodeErrorKind::range_violation, "seq is negative"};
    } else {
      return DecodeError{DecodeErrorKind::malformed_line, "seq is not an integer"};
    }
  }

  if (auto why = frame_violation(f)) {
    return DecodeError{DecodeErrorKind::range_violation, *why};
  }
  return f;
}

CalibrationProfile::CalibrationProfile(std::string device, double offset, double scale)
    : device_id(std::move(device)), offset_counts(offset), scale_counts_per_gf(scale) {
  if (scale == 0.0 || !std::isfinite(scale) || !std::isfinite(offset)) {
    throw std::invalid_argument("calibration scale must be finite and non-zero");
  }
}

const CalibrationProfile& CalibrationBook::lookup(std::string_view device) const {
  auto it = by_device.find(std::string(device));
  return it == by_device.end() ? fallback : it->second;
}

Result<CalibrationBook, std::string> CalibrationBook::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) return std::string("cannot open calibration file: ") + file.string();
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return std::string("calibration file is not a JSON object");
  }

  const auto parse_profile = [](const json& p,
                                std::string device) -> Result<CalibrationProfile, std::string> {
    if (!p.is_object() || !p.contains("offset_counts") || !p.contains("scale_counts_per_gf") ||
        !p["offset_counts"].is_number() || !p["scale_counts_per_gf"].is_number()) {
      return std::string("profile needs numeric offset_counts and scale_counts_per_gf");
    }
    const double scale = p["scale_counts_per_gf"].get<double>();
    if (scale == 0.0) return std::string("scale_counts_per_gf must be non-zero");
    return CalibrationProfile(std::move(device), p["offset_counts"].get<double>(), scale);
  };

  CalibrationBook book;
  if (doc.contains("default")) {
    auto r = parse_profile(doc["default"], "*");
    if (!r.ok()) return r.error();
    book.fallback = r.value();
  }
  if (doc.contains("devices")) {
    if (!doc["devices"].is_object()) return std::string("\"devices\" must be an object");
    for (auto& [device, p] : doc["devices"].items()) {
      auto r = parse_profile(p, device);
      if (!r.ok()) return r.error();
      book.by_device.emplace(device, r.value());
    }
  }
  return book;
}

}  // namespace emoc
