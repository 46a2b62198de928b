#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "emotioncarrier/result.hpp"
#include "emotioncarrier/segmenter.hpp"
#include "emotioncarrier/store.hpp"

namespace emoc {

struct BindError {
  std::string message;
};

// Counter snapshot; totals since service start.
struct IngestCounters {
  uint64_t connections = 0;
  uint64_t rejected_connections = 0;  // device already claimed elsewhere
  uint64_t lines_in = 0;
  uint64_t hello_lines = 0;
  uint64_t decode_errors = 0;
  uint64_t frames_accepted = 0;
  uint64_t stale_frames = 0;
  uint64_t sessions_opened = 0;
  uint64_t sessions_closed = 0;
  uint64_t frames_persisted = 0;   // frames inside closed, stored sessions
  uint64_t frames_discarded = 0;   // valid frames outside any session window
  uint64_t store_errors = 0;
};

// Streaming ingest server: accepts newline-delimited frame connections,
// validates and segments them per device, and appends closed sessions to the
// store.
//
// Concurrency: one reader thread per connection. Each device is claimed by
// the first connection that sends its frames; a second live connection
// claiming the same device is closed (the segmenter state itself stays
// single-threaded). Store appends are serialized internally. Invalid lines
// and stale frames are counted, never fatal.
//
// A connection may open with one hello line {"v":1,"hello":{"participant":
// "p-07"}} naming the participant for the sessions it produces; the default
// is "anonymous". Disconnecting flushes the connection's devices: open
// sessions close at their last above-threshold sample.
class IngestService {
 public:
  IngestService(SessionStore& store, SegmenterConfig segmenter_config);
  // With a calibration book, each device's segmenter thresholds against its
  // own profile; the plain constructor applies segmenter_config.calibration
  // to every device.
  IngestService(SessionStore& store, SegmenterConfig segmenter_config, CalibrationBook book);
  ~IngestService();

  IngestService(const IngestService&) = delete;
  IngestService& operator=(const IngestService&) = delete;

  // Binds and starts accepting. Port 0 selects an ephemeral port; the bound
  // port is returned.
  Result<uint16_t, BindError> start(const std::string& host, uint16_t port);

  // Graceful stop: shuts the listener, drains connections, flushes open
  // sessions to the store.
  void stop();

  uint16_t port() const;
  IngestCounters counters() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace emoc
