#include "emotioncarrier/ingest.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "net.hpp"

namespace emoc {

namespace {

// First line of a connection may introduce the participant.
std::optional<std::string> parse_hello(std::string_view line) {
  const auto doc = nlohmann::json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("hello")) return std::nullopt;
  const auto& hello = doc["hello"];
  if (!hello.is_object()) return std::nullopt;
  return hello.value("participant", "anonymous");
}

// Reads LF-delimited lines, invoking on_line per complete line (and once for
// an unterminated tail). Stops on peer close, on_line returning false, or the
// stop flag flipping.
void read_lines(int fd, const std::atomic<bool>& stopping,
                const std::function<bool(std::string_view)>& on_line) {
  std::string pending;
  char buf[16384];
  bool draining = true;
  while (draining) {
    if (stopping.load(std::memory_order_relaxed)) break;
    pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 200);
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) continue;
    const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
    if (n <= 0) break;
    pending.append(buf, static_cast<size_t>(n));
    size_t start = 0;
    for (size_t nl = pending.find('\n', start); nl != std::string::npos;
         nl = pending.find('\n', start)) {
      if (!on_line(std::string_view(pending).substr(start, nl - start))) {
        draining = false;
        start = nl + 1;
        break;
      }
      start = nl + 1;
    }
    pending.erase(0, start);
  }
  if (draining && !pending.empty()) on_line(pending);
}

}  // namespace

struct IngestService::Impl {
  SessionStore& store;
  SegmenterConfig segmenter_config;

  int listen_fd = -1;
  uint16_t bound_port = 0;
  std::atomic<bool> stopping{false};
  std::thread accept_thread;

  std::mutex conn_mutex;
  std::vector<std::thread> conn_threads;
  std::vector<int> conn_fds;

  // One slot per device. `owner` (guarded by device_mutex) is the id of the
  // connection currently allowed to feed it; the slot mutex guards the
  // segmenter itself. Segmenters outlive connections so the staleness
  // watermark carries across reconnects of the same device.
  struct DeviceSlot {
    std::mutex m;
    uint64_t owner = 0;  // 0 = unclaimed
    DeviceSegmenter seg;
    DeviceSlot(const SegmenterConfig& cfg, std::string device, std::string participant)
        : seg(cfg, std::move(device), std::move(participant)) {}
  };
  std::mutex device_mutex;
  std::map<std::string, std::unique_ptr<DeviceSlot>> devices;
  std::optional<CalibrationBook> calibration_book;

  std::mutex store_mutex;

  std::mutex counter_mutex;
  IngestCounters totals;

  Impl(SessionStore& s, SegmenterConfig cfg) : store(s), segmenter_config(std::move(cfg)) {}

  void bump(uint64_t IngestCounters::* field, uint64_t by = 1) {
    std::lock_guard lock(counter_mutex);
    totals.*field += by;
  }

  DeviceSlot* claim(const std::string& device, uint64_t conn_id, const std::string& participant) {
    std::lock_guard lock(device_mutex);
    auto it = devices.find(device);
    if (it == devices.end()) {
      SegmenterConfig cfg = segmenter_config;
      if (calibration_book) cfg.calibration = calibration_book->lookup(device);
      it = devices.emplace(device, std::make_unique<DeviceSlot>(cfg, device, participant)).first;
      it->second->owner = conn_id;
      return it->second.get();
    }
    DeviceSlot* slot = it->second.get();
    if (slot->owner == conn_id) return slot;
    if (slot->owner != 0) return nullptr;
    slot->owner = conn_id;
    std::lock_guard slot_lock(slot->m);
    slot->seg.set_participant(participant);
    return slot;
  }

  void release(const std::set<std::string>& owned, uint64_t conn_id) {
    std::lock_guard lock(device_mutex);
    for (const auto& device : owned) {
      auto it = devices.find(device);
      if (it != devices.end() && it->second->owner == conn_id) it->second->owner = 0;
    }
  }

  void persist_events(std::vector<SessionEvent>& events) {
    for (SessionEvent& ev : events) {
      if (ev.kind == SessionEvent::Kind::opened) {
        bump(&IngestCounters::sessions_opened);
        continue;
      }
      bump(&IngestCounters::sessions_closed);
      const uint64_t frames = ev.session.frame_count();
      std::lock_guard lock(store_mutex);
      auto appended = store.append_session(ev.session);
      if (appended.ok()) {
        bump(&IngestCounters::frames_persisted, frames);
      } else {
        bump(&IngestCounters::store_errors);
        std::cerr << "ingest: store append failed for device " << ev.device_id << ": "
                  << appended.error().detail << "\n";
      }
    }
    events.clear();
  }

  void run_connection(int fd, uint64_t conn_id) {
    std::string participant = "anonymous";
    std::set<std::string> owned;
    std::map<std::string, DeviceSlot*> slots;  // connection-local claim cache
    std::vector<SessionEvent> events;
    bool first_line = true;
    int logged_errors = 0;

    read_lines(fd, stopping, [&](std::string_view line) -> bool {
      bump(&IngestCounters::lines_in);
      if (first_line) {
        first_line = false;
        if (auto hello = parse_hello(line)) {
          bump(&IngestCounters::hello_lines);
          participant = *hello;
          return true;
        }
      }
      auto decoded = decode_frame(line);
      if (!decoded.ok()) {
        bump(&IngestCounters::decode_errors);
        if (logged_errors < 5) {
          ++logged_errors;
          std::cerr << "ingest: dropped line (" << decode_error_name(decoded.error().kind)
                    << ": " << decoded.error().detail << ")\n";
        }
        return true;
      }
      const SensorFrame& frame = decoded.value();

      DeviceSlot* slot;
      if (auto it = slots.find(frame.device_id); it != slots.end()) {
        slot = it->second;
      } else {
        // Brief retry covers the teardown window of a connection that just
        // closed this device; a genuinely live owner still wins.
        slot = claim(frame.device_id, conn_id, participant);
        for (int spin = 0; slot == nullptr && spin < 50 && !stopping.load(); ++spin) {
          std::this_thread::sleep_for(std::chrono::milliseconds(10));
          slot = claim(frame.device_id, conn_id, participant);
        }
        if (slot == nullptr) {
          bump(&IngestCounters::rejected_connections);
          std::cerr << "ingest: rejected connection claiming busy device " << frame.device_id
                    << "\n";
          return false;
        }
        slots.emplace(frame.device_id, slot);
        owned.insert(frame.device_id);
      }

      FeedStatus status;
      {
        std::lock_guard lock(slot->m);
        status = slot->seg.feed(frame, events);
      }
      if (status == FeedStatus::stale) {
        bump(&IngestCounters::stale_frames);
      } else {
        bump(&IngestCounters::frames_accepted);
      }
      if (!events.empty()) persist_events(events);
      return true;
    });

    // Stream end: close out whatever this connection was feeding. Claims are
    // released before persisting, so once a session is visible in the store
    // its device is claimable again.
    for (const auto& device : owned) {
      DeviceSlot* slot = slots[device];
      std::lock_guard lock(slot->m);
      slot->seg.finish(events);
    }
    release(owned, conn_id);
    persist_events(events);
    {
      // Deregister before closing so stop() never touches a reused fd.
      std::lock_guard lock(conn_mutex);
      std::erase(conn_fds, fd);
    }
    ::close(fd);
  }
};

IngestService::IngestService(SessionStore& store, SegmenterConfig segmenter_config)
    : impl_(std::make_unique<Impl>(store, std::move(segmenter_config))) {}

IngestService::IngestService(SessionStore& store, SegmenterConfig segmenter_config,
                             CalibrationBook book)
    : impl_(std::make_unique<Impl>(store, std::move(segmenter_config))) {
  impl_->calibration_book = std::move(book);
}

IngestService::~IngestService() { stop(); }

Result<uint16_t, BindError> IngestService::start(const std::string& host, uint16_t port) {
  if (auto why = config_violation(impl_->segmenter_config)) {
    return BindError{"bad segmenter config: " + *why};
  }
  if (!impl_->store.writable()) return BindError{"store is not writable"};
  std::string error;
  impl_->listen_fd = net::tcp_listen(host, port, error);
  if (impl_->listen_fd < 0) {
    return BindError{"cannot listen on " + host + ":" + std::to_string(port) + ": " + error};
  }
  impl_->bound_port = net::bound_port(impl_->listen_fd).value_or(port);

  impl_->accept_thread = std::thread([impl = impl_.get()] {
    static std::atomic<uint64_t> next_conn_id{1};
    while (!impl->stopping.load()) {
      pollfd pfd{impl->listen_fd, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, 200);
      if (rc < 0 && errno != EINTR) break;
      if (rc <= 0) continue;
      const int fd = ::accept4(impl->listen_fd, nullptr, nullptr, SOCK_CLOEXEC);
      if (fd < 0) continue;
      const uint64_t conn_id = next_conn_id++;
      impl->bump(&IngestCounters::connections);
      std::lock_guard lock(impl->conn_mutex);
      impl->conn_fds.push_back(fd);
      impl->conn_threads.emplace_back([impl, fd, conn_id] { impl->run_connection(fd, conn_id); });
    }
  });

  return impl_->bound_port;
}

void IngestService::stop() {
  if (!impl_ || impl_->stopping.exchange(true)) return;
  if (impl_->listen_fd >= 0) {
    ::shutdown(impl_->listen_fd, SHUT_RDWR);
    ::close(impl_->listen_fd);
    impl_->listen_fd = -1;
  }
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(impl_->conn_mutex);
    threads.swap(impl_->conn_threads);
    for (int fd : impl_->conn_fds) ::shutdown(fd, SHUT_RD);
    impl_->conn_fds.clear();
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
}

uint16_t IngestService::port() const { return impl_->bound_port; }

IngestCounters IngestService::counters() const {
  IngestCounters snapshot;
  {
    std::lock_guard lock(impl_->counter_mutex);
    snapshot = impl_->totals;
  }
  std::lock_guard lock(impl_->device_mutex);
  for (auto& [device, slot] : impl_->devices) {
    std::lock_guard slot_lock(slot->m);
    snapshot.frames_discarded += slot->seg.counters().discarded;
  }
  return snapshot;
}

}  // namespace emoc
