#include "emotioncarrier/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <system_error>

#include <nlohmann/json.hpp>

namespace emoc {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

StoreError io_error(const std::string& what, int err = errno) {
  const auto kind = err == ENOSPC ? StoreErrorKind::storage_full : StoreErrorKind::io;
  return StoreError{kind, what + ": " + std::strerror(err)};
}

// Write-then-rename so files appear atomically.
std::optional<StoreError> write_atomic(const fs::path& target, const std::string& content) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return io_error("cannot create " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      return io_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) return StoreError{StoreErrorKind::io, "rename failed: " + ec.message()};
  return std::nullopt;
}

}  // namespace

std::string_view store_error_name(StoreErrorKind kind) {
  switch (kind) {
    case StoreErrorKind::conflict: return "conflict";
    case StoreErrorKind::not_found: return "not_found";
    case StoreErrorKind::corrupt_file: return "corrupt_file";
    case StoreErrorKind::storage_full: return "storage_full";
    case StoreErrorKind::locked: return "locked";
    case StoreErrorKind::io: return "io";
  }
  return "?";
}

Result<SessionStore, StoreError> SessionStore::open_reader(fs::path root) {
  std::error_code ec;
  if (!fs::exists(root, ec)) {
    return StoreError{StoreErrorKind::not_found, "no store at " + root.string()};
  }
  return SessionStore(std::move(root));
}

Result<SessionStore, StoreError> SessionStore::open_writer(fs::path root) {
  std::error_code ec;
  fs::create_directories(root / "sessions", ec);
  if (ec) return StoreError{StoreErrorKind::io, "cannot create store layout: " + ec.message()};
  fs::create_directories(root / "reports", ec);
  if (ec) return StoreError{StoreErrorKind::io, "cannot create store layout: " + ec.message()};

  SessionStore store(std::move(root));
  const fs::path lock_path = store.root_ / ".lock";
  store.lock_fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (store.lock_fd_ < 0) return io_error("cannot open lock file " + lock_path.string());
  if (::flock(store.lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(store.lock_fd_);
    store.lock_fd_ = -1;
    return StoreError{StoreErrorKind::locked, "another writer holds " + lock_path.string()};
  }
  return store;
}

SessionStore::SessionStore(SessionStore&& other) noexcept
    : root_(std::move(other.root_)), lock_fd_(other.lock_fd_) {
  other.lock_fd_ = -1;
}

SessionStore& SessionStore::operator=(SessionStore&& other) noexcept {
  if (this != &other) {
    if (lock_fd_ >= 0) ::close(lock_fd_);
    root_ = std::move(other.root_);
    lock_fd_ = other.lock_fd_;
    other.lock_fd_ = -1;
  }
  return *this;
}

SessionStore::~SessionStore() {
  if (lock_fd_ >= 0) ::close(lock_fd_);  // releases the flock
}

fs::path SessionStore::session_path(const std::string& id) const {
  return root_ / "sessions" / (id + ".jsonl");
}

fs::path SessionStore::report_path(const std::string& id) const {
  return root_ / "reports" / (id + ".json");
}

Result<std::string, StoreError> SessionStore::append_session(const Session& session) {
  if (!writable()) return StoreError{StoreErrorKind::io, "store opened read-only"};
  if (session.session_id.empty()) {
    return StoreError{StoreErrorKind::corrupt_file, "session has no id"};
  }
  const fs::path path = session_path(session.session_id);
  std::error_code ec;
  if (fs::exists(path, ec)) {
    return StoreError{StoreErrorKind::conflict, "session already stored: " + session.session_id};
  }

  const std::vector<SensorFrame> frames = session_frames(session);

  ordered_json header;
  header["type"] = "session_header";
  header["v"] = 1;
  ordered_json meta;
  meta["session_id"] = session.session_id;
  meta["participant_id"] = session.participant_id;
  meta["device_id"] = session.device_id;
  meta["start_ts_ms"] = session.start_ts_ms;
  meta["end_ts_ms"] = session.end_ts_ms;
  header["session"] = std::move(meta);

  std::string content = header.dump();
  content += '\n';
  for (const SensorFrame& f : frames) {
    auto line = encode_frame(f);
    if (!line.ok()) {
      return StoreError{StoreErrorKind::corrupt_file,
                        "session holds an unencodable frame: " + line.error().reason};
    }
    content += line.value();
  }
  ordered_json footer;
  footer["type"] = "session_end";
  footer["frames"] = frames.size();
  content += footer.dump();
  content += '\n';

  if (auto err = write_atomic(path, content)) return *err;

  // Index line goes in only once the session file is durable.
  ordered_json entry;
  entry["session_id"] = session.session_id;
  entry["participant_id"] = session.participant_id;
  entry["device_id"] = session.device_id;
  entry["start_ts_ms"] = session.start_ts_ms;
  entry["end_ts_ms"] = session.end_ts_ms;
  entry["frames"] = frames.size();
  std::ofstream index(root_ / "index.jsonl", std::ios::binary | std::ios::app);
  if (!index) return io_error("cannot open index");
  index << entry.dump() << '\n';
  index.flush();
  if (!index) return io_error("cannot append index entry");

  return session.session_id;
}

Result<Session, StoreError> SessionStore::load_session(const std::string& session_id) const {
  std::ifstream in(session_path(session_id), std::ios::binary);
  if (!in) return StoreError{StoreErrorKind::not_found, "no session " + session_id};

  std::string line;
  if (!std::getline(in, line)) {
    return StoreError{StoreErrorKind::corrupt_file, "empty session file"};
  }
  const auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("type", "") != "session_header" ||
      !header.contains("session")) {
    return StoreError{StoreErrorKind::corrupt_file, "missing session_header"};
  }
  const auto& meta = header["session"];

  Session s;
  try {
    s.session_id = meta.at("session_id").get<std::string>();
    s.participant_id = meta.at("participant_id").get<std::string>();
    s.device_id = meta.at("device_id").get<std::string>();
    s.start_ts_ms = meta.at("start_ts_ms").get<int64_t>();
    s.end_ts_ms = meta.at("end_ts_ms").get<int64_t>();
  } catch (const nlohmann::json::exception&) {
    return StoreError{StoreErrorKind::corrupt_file, "bad session_header fields"};
  }
  for (Channel c : all_channels()) s.series(c).channel = c;

  uint64_t frame_count = 0;
  bool saw_end = false;
  while (std::getline(in, line)) {
    if (line.find("\"session_end\"") != std::string::npos) {
      const auto footer = nlohmann::json::parse(line, nullptr, false);
      if (!footer.is_discarded() && footer.value("type", "") == "session_end") {
        if (footer.value("frames", uint64_t(0)) != frame_count) {
          return StoreError{StoreErrorKind::corrupt_file, "frame count mismatch"};
        }
        saw_end = true;
        break;
      }
    }
    auto frame = decode_frame(line);
    if (!frame.ok()) {
      return StoreError{StoreErrorKind::corrupt_file,
                        "bad frame line: " + frame.error().detail};
    }
    const SensorFrame& f = frame.value();
    if (f.device_id != s.device_id) {
      return StoreError{StoreErrorKind::corrupt_file, "frame from foreign device"};
    }
    ChannelSeries& cs = s.series(f.channel);
    if (!cs.timestamps_ms.empty() && f.timestamp_ms <= cs.timestamps_ms.back()) {
      return StoreError{StoreErrorKind::corrupt_file, "frame timestamps out of order"};
    }
    cs.timestamps_ms.push_back(f.timestamp_ms);
    cs.values.push_back(f.value);
    ++frame_count;
  }
  if (!saw_end) return StoreError{StoreErrorKind::corrupt_file, "missing session_end"};
  return s;
}

Result<std::vector<SessionSummary>, StoreError> SessionStore::list_sessions(
    const ListFilter& filter) const {
  std::vector<SessionSummary> out;
  std::ifstream in(root_ / "index.jsonl", std::ios::binary);
  if (!in) return out;  // an index-less store is just empty

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto entry = nlohmann::json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.is_object()) {
      return StoreError{StoreErrorKind::corrupt_file, "bad index line"};
    }
    SessionSummary s;
    try {
      s.session_id = entry.at("session_id").get<std::string>();
      s.participant_id = entry.at("participant_id").get<std::string>();
      s.device_id = entry.at("device_id").get<std::string>();
      s.start_ts_ms = entry.at("start_ts_ms").get<int64_t>();
      s.end_ts_ms = entry.at("end_ts_ms").get<int64_t>();
      s.frames = entry.at("frames").get<uint64_t>();
    } catch (const nlohmann::json::exception&) {
      return StoreError{StoreErrorKind::corrupt_file, "bad index entry"};
    }
    if (filter.participant && s.participant_id != *filter.participant) continue;
    if (filter.start_at_or_after_ms && s.start_ts_ms < *filter.start_at_or_after_ms) continue;
    if (filter.start_at_or_before_ms && s.start_ts_ms > *filter.start_at_or_before_ms) continue;
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const SessionSummary& a, const SessionSummary& b) {
    if (a.start_ts_ms != b.start_ts_ms) return a.start_ts_ms < b.start_ts_ms;
    return a.session_id < b.session_id;
  });
  return out;
}

std::optional<StoreError> SessionStore::save_report(const FeedbackReport& report) {
  if (report.session_id.empty()) {
    return StoreError{StoreErrorKind::io, "report has no session id"};
  }
  std::error_code ec;
  fs::create_directories(root_ / "reports", ec);
  return write_atomic(report_path(report.session_id), report_to_json(report) + "\n");
}

Result<FeedbackReport, StoreError> SessionStore::load_report(const std::string& session_id) const {
  std::ifstream in(report_path(session_id), std::ios::binary);
  if (!in) return StoreError{StoreErrorKind::not_found, "no report for " + session_id};
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto report = report_from_json(text);
  if (!report.ok()) return StoreError{StoreErrorKind::corrupt_file, report.error()};
  return report.value();
}

}  // namespace emoc
