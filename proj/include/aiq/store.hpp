#pragma once

// File-based store:
//   <store>/subjects.json
//   <store>/index.json                  session summaries
//   <store>/sessions/<id>.json
//   <store>/batteries/<id>-<version>.json
//   <store>/results.json                imported IQ results (optional)
//   <store>/profiles/*.json             capability profiles (optional)

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aiq/battery.hpp"
#include "aiq/scoring.hpp"
#include "aiq/session.hpp"

namespace aiq {

// Exclusive advisory lock on a file (flock). Blocks until acquired.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

struct SessionSummary {
  std::string id;
  std::string subject_id;
  BatteryRef battery;
  SessionStatus status = SessionStatus::Created;
  bool operator==(const SessionSummary&) const = default;
};

class Store {
 public:
  // Creates the directory layout when missing.
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  std::vector<Subject> subjects() const;
  std::optional<Subject> find_subject(const std::string& id) const;
  // Throws DuplicateSubject when the id is taken.
  void add_subject(const Subject& subject);

  std::filesystem::path battery_path(const BatteryRef& ref) const;
  // Stores a copy of the battery; an existing different copy under the same
  // id/version is InvalidBattery.
  void put_battery(const Battery& battery);
  // ParseError("UnresolvedRef") when absent.
  Battery battery(const BatteryRef& ref) const;

  std::filesystem::path session_path(const std::string& id) const;
  bool has_session(const std::string& id) const;
  std::filesystem::path save_session(const Session& session);
  Session load_session(const std::string& id) const;
  std::vector<SessionSummary> sessions() const;

  // Single-writer lock for one session.
  FileLock lock_session(const std::string& id) const;

  std::vector<IQResult> imported_results() const;
  void put_imported_results(const std::vector<IQResult>& results);

  // IQ of every Complete session plus imported results.
  std::vector<IQResult> all_results() const;

  std::filesystem::path profiles_dir() const { return root_ / "profiles"; }

 private:
  void update_index(const Session& session);

  std::filesystem::path root_;
};

// Canonical session serialization. The store directory is the parent of the
// sessions/ directory the file lives in.
std::filesystem::path save_session(Store& store, const Session& session);
// Resolves the battery reference and checks the session against it;
// ParseError on any failure (UnresolvedRef for a missing battery version).
Session load_session(const std::filesystem::path& path);

// Keeps the newest result (by computed_at, then session id) per subject.
std::vector<IQResult> latest_per_subject(std::vector<IQResult> results);

}  // namespace aiq
