#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emotioncarrier/result.hpp"
#include "emotioncarrier/telemetry.hpp"

namespace emoc {

struct ReplayOptions {
  double speed = 1.0;        // gap scale; ignored when max_speed
  bool max_speed = false;    // send back-to-back
  std::string participant;   // hello sent when non-empty (store headers win)
};

struct ReplayStats {
  uint64_t frames_sent = 0;
  uint64_t bytes_sent = 0;
};

enum class ReplayErrorKind { connection_refused, malformed_file, io };

struct ReplayError {
  ReplayErrorKind kind;
  std::string message;
};

// Reads one frame-per-line file and streams it to a live ingest endpoint with
// inter-frame gaps scaled by 1/speed. Store session files are accepted too:
// the header names the participant and the end record terminates the stream.
// Segmentation downstream keys on frame timestamps, so any speed produces the
// same sessions.
Result<ReplayStats, ReplayError> replay_file(const std::filesystem::path& file,
                                             const std::string& host, uint16_t port,
                                             const ReplayOptions& opts = {});

// Sends pre-encoded frames over one connection (optionally preceded by a
// hello line); the in-memory variant of replay used by the simulator's
// streaming mode.
Result<ReplayStats, ReplayError> stream_frames(const std::vector<SensorFrame>& frames,
                                               const std::string& host, uint16_t port,
                                               const ReplayOptions& opts = {});

}  // namespace emoc
