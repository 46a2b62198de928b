#include "emotioncarrier/replay.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "net.hpp"

namespace emoc {

namespace {

struct WireFile {
  std::vector<std::string> lines;      // encoded frame lines, newline included
  std::vector<int64_t> timestamps_ms;  // parallel to lines
  std::string participant;             // from a store header, if present
};

Result<WireFile, ReplayError> load_wire_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return ReplayError{ReplayErrorKind::io, "cannot open " + path.string()};
  }
  WireFile out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.find("\"session_header\"") != std::string::npos ||
        line.find("\"session_end\"") != std::string::npos) {
      const auto doc = nlohmann::json::parse(line, nullptr, false);
      if (!doc.is_discarded() && doc.is_object()) {
        const std::string type = doc.value("type", "");
        if (type == "session_header") {
          if (doc.contains("session") && doc["session"].is_object()) {
            out.participant = doc["session"].value("participant_id", "");
          }
          continue;
        }
        if (type == "session_end") break;
      }
    }
    auto frame = decode_frame(line);
    if (!frame.ok()) {
      return ReplayError{ReplayErrorKind::malformed_file,
                         path.string() + ":" + std::to_string(line_no) + ": " +
                             frame.error().detail};
    }
    out.timestamps_ms.push_back(frame.value().timestamp_ms);
    out.lines.push_back(line + "\n");
  }
  return out;
}

Result<ReplayStats, ReplayError> send_lines(const WireFile& file, const std::string& host,
                                            uint16_t port, const ReplayOptions& opts) {
  std::string participant = opts.participant.empty() ? file.participant : opts.participant;

  std::string error;
  const int fd = net::tcp_connect(host, port, error);
  if (fd < 0) {
    return ReplayError{ReplayErrorKind::connection_refused,
                       "cannot connect to " + host + ":" + std::to_string(port) + ": " + error};
  }

  ReplayStats stats;
  const auto send_or_fail = [&](std::string_view data) -> bool {
    if (!net::send_all(fd, data)) return false;
    stats.bytes_sent += data.size();
    return true;
  };

  if (!participant.empty()) {
    nlohmann::ordered_json hello;
    hello["v"] = 1;
    hello["hello"] = {{"participant", participant}};
    if (!send_or_fail(hello.dump() + "\n")) {
      ::close(fd);
      return ReplayError{ReplayErrorKind::io, "send failed on hello line"};
    }
  }

  if (opts.max_speed) {
    // Batch into large writes; timestamps drive segmentation, not pacing.
    std::string chunk;
    chunk.reserve(64 * 1024);
    for (const std::string& line : file.lines) {
      chunk += line;
      if (chunk.size() >= 64 * 1024) {
        if (!send_or_fail(chunk)) {
          ::close(fd);
          return ReplayError{ReplayErrorKind::io, "send failed mid-stream"};
        }
        chunk.clear();
      }
      stats.frames_sent++;
    }
    if (!chunk.empty() && !send_or_fail(chunk)) {
      ::close(fd);
      return ReplayError{ReplayErrorKind::io, "send failed mid-stream"};
    }
  } else {
    const double speed = opts.speed > 0.0 ? opts.speed : 1.0;
    for (size_t i = 0; i < file.lines.size(); ++i) {
      if (i > 0) {
        const int64_t gap = file.timestamps_ms[i] - file.timestamps_ms[i - 1];
        if (gap > 0) {
          std::this_thread::sleep_for(
              std::chrono::microseconds(static_cast<int64_t>(1000.0 * gap / speed)));
        }
      }
      if (!send_or_fail(file.lines[i])) {
        ::close(fd);
        return ReplayError{ReplayErrorKind::io, "send failed mid-stream"};
      }
      stats.frames_sent++;
    }
  }

  ::shutdown(fd, SHUT_WR);
  ::close(fd);
  return stats;
}

}  // namespace

Result<ReplayStats, ReplayError> replay_file(const std::filesystem::path& file,
                                             const std::string& host, uint16_t port,
                                             const ReplayOptions& opts) {
  auto wire = load_wire_file(file);
  if (!wire.ok()) return wire.error();
  return send_lines(wire.value(), host, port, opts);
}

Result<ReplayStats, ReplayError> stream_frames(const std::vector<SensorFrame>& frames,
                                               const std::string& host, uint16_t port,
                                               const ReplayOptions& opts) {
  WireFile file;
  for (const SensorFrame& f : frames) {
    auto line = encode_frame(f);
    if (!line.ok()) {
      return ReplayError{ReplayErrorKind::malformed_file, line.error().reason};
    }
    file.lines.push_back(std::move(line).value());
    file.timestamps_ms.push_back(f.timestamp_ms);
  }
  return send_lines(file, host, port, opts);
}

}  // namespace emoc
