#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emotioncarrier/gateway.hpp"
#include "emotioncarrier/result.hpp"
#include "emotioncarrier/session.hpp"

namespace emoc {

enum class StoreErrorKind { conflict, not_found, corrupt_file, storage_full, locked, io };

struct StoreError {
  StoreErrorKind kind;
  std::string detail;
};

std::string_view store_error_name(StoreErrorKind kind);

// index.jsonl entry; one per closed session.
struct SessionSummary {
  std::string session_id;
  std::string participant_id;
  std::string device_id;
  int64_t start_ts_ms = 0;
  int64_t end_ts_ms = 0;
  uint64_t frames = 0;
};

struct ListFilter {
  std::optional<std::string> participant;
  std::optional<int64_t> start_at_or_after_ms;
  std::optional<int64_t> start_at_or_before_ms;
};

// Append-only on-disk layout under one root directory:
//   sessions/<session_id>.jsonl   header record, wire frames, end record
//   index.jsonl                   one summary line per closed session
//   reports/<session_id>.json     feedback reports
//   .lock                         single-writer guard (flock)
//
// Session files appear atomically (written to a .tmp sibling, then renamed);
// the index line is appended only after the rename, so readers never observe
// a half-written session. A leftover .tmp from a crashed writer is inert.
class SessionStore {
 public:
  static Result<SessionStore, StoreError> open_reader(std::filesystem::path root);
  // Creates the layout if needed and takes the writer lock; fails with
  // `locked` when another writer holds it.
  static Result<SessionStore, StoreError> open_writer(std::filesystem::path root);

  SessionStore(SessionStore&&) noexcept;
  SessionStore& operator=(SessionStore&&) noexcept;
  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;
  ~SessionStore();

  Result<std::string, StoreError> append_session(const Session& session);
  Result<Session, StoreError> load_session(const std::string& session_id) const;
  Result<std::vector<SessionSummary>, StoreError> list_sessions(const ListFilter& filter = {}) const;

  // Reports are standalone atomic files; they do not need the session lock.
  std::optional<StoreError> save_report(const FeedbackReport& report);
  Result<FeedbackReport, StoreError> load_report(const std::string& session_id) const;

  const std::filesystem::path& root() const { return root_; }
  bool writable() const { return lock_fd_ >= 0; }

 private:
  explicit SessionStore(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path session_path(const std::string& id) const;
  std::filesystem::path report_path(const std::string& id) const;

  std::filesystem::path root_;
  int lock_fd_ = -1;
};

}  // namespace emoc
