#include "aiq/store.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "aiq/error.hpp"

namespace aiq {

namespace fs = std::filesystem;

FileLock::FileLock(const fs::path& path) {
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::StoreWriteError, path.string(), std::strerror(errno));
  while (::flock(fd_, LOCK_EX) != 0) {
    if (errno != EINTR) {
      const int code = errno;
      ::close(fd_);
      throw Error(ErrorCode::StoreWriteError, path.string(), std::strerror(code));
    }
  }
}

FileLock::~FileLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const auto& dir : {root_, root_ / "sessions", root_ / "batteries"}) {
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      throw Error(ErrorCode::StoreWriteError, dir.string(), "cannot create store directory");
    }
  }
}

std::vector<Subject> Store::subjects() const {
  const fs::path path = root_ / "subjects.json";
  if (!fs::exists(path)) return {};
  const Json json = read_json_file(path);
  if (!json.is_array()) throw Error(ErrorCode::ParseError, path.string(), "expected array of subjects");
  std::vector<Subject> out;
  for (std::size_t i = 0; i < json.size(); ++i) {
    out.push_back(subject_from_json(json[i], "subjects[" + std::to_string(i) + "]"));
  }
  return out;
}

std::optional<Subject> Store::find_subject(const std::string& id) const {
  for (auto& s : subjects()) {
    if (s.id == id) return s;
  }
  return std::nullopt;
}

void Store::add_subject(const Subject& subject) {
  if (subject.id.empty()) throw Error(ErrorCode::ParseError, "id", "subject id is empty");
  FileLock lock(root_ / ".subjects.lock");
  std::vector<Subject> all = subjects();
  for (const auto& s : all) {
    if (s.id == subject.id) throw Error(ErrorCode::DuplicateSubject, subject.id, "subject already registered");
  }
  all.push_back(subject);
  std::sort(all.begin(), all.end(), [](const Subject& x, const Subject& y) { return x.id < y.id; });
  Json json = Json::array();
  for (const auto& s : all) json.push_back(to_json(s));
  write_text_atomic(root_ / "subjects.json", canonical_dump(json));
}

fs::path Store::battery_path(const BatteryRef& ref) const {
  return root_ / "batteries" / (ref.id + "-" + ref.version + ".json");
}

void Store::put_battery(const Battery& battery) {
  const fs::path path = battery_path({battery.id, battery.version});
  FileLock lock(root_ / ".batteries.lock");
  if (fs::exists(path)) {
    if (battery_from_json(read_json_file(path)) != battery) {
      throw Error(ErrorCode::InvalidBattery, battery.id + "-" + battery.version,
                  "a different battery is already stored under this id and version");
    }
    return;
  }
  save_battery(battery, path);
}

Battery Store::battery(const BatteryRef& ref) const {
  const fs::path path = battery_path(ref);
  if (!fs::exists(path)) {
    throw Error(ErrorCode::ParseError, "UnresolvedRef",
                "battery " + ref.id + " version " + ref.version + " is not in the store");
  }
  return battery_from_json(read_json_file(path));
}

fs::path Store::session_path(const std::string& id) const { return root_ / "sessions" / (id + ".json"); }

bool Store::has_session(const std::string& id) const { return fs::exists(session_path(id)); }

fs::path Store::save_session(const Session& session) {
  const fs::path path = session_path(session.id);
  write_text_atomic(path, canonical_dump(to_json(session)));
  update_index(session);
  return path;
}

Session Store::load_session(const std::string& id) const {
  if (id.empty() || id.find('/') != std::string::npos || !has_session(id)) {
    throw Error(ErrorCode::UnknownSession, id, "no such session");
  }
  return aiq::load_session(session_path(id));
}

void Store::update_index(const Session& session) {
  FileLock lock(root_ / ".index.lock");
  const fs::path path = root_ / "index.json";
  Json index = Json::object();
  if (fs::exists(path)) {
    try {
      index = read_json_file(path);
    } catch (const Error&) {
      index = Json::object();  // rebuilt entry by entry
    }
  }
  if (!index.is_object()) index = Json::object();
  index[session.id] = {{"subject_id", session.subject_id},
                       {"battery", {{"id", session.battery.id}, {"version", session.battery.version}}},
                       {"status", to_string(session.status)}};
  write_text_atomic(path, canonical_dump(index));
}

std::vector<SessionSummary> Store::sessions() const {
  std::vector<SessionSummary> out;
  const fs::path path = root_ / "index.json";
  if (!fs::exists(path)) return out;
  const Json index = read_json_file(path);
  for (const auto& [id, entry] : index.items()) {
    FieldReader r(entry, "index." + id);
    SessionSummary s;
    s.id = id;
    s.subject_id = r.string("subject_id");
    FieldReader b(r.object("battery"), "index." + id + ".battery");
    s.battery = {b.string("id"), b.string("version")};
    s.status = parse_session_status(r.string("status"));
    out.push_back(std::move(s));
  }
  return out;
}

FileLock Store::lock_session(const std::string& id) const {
  return FileLock(root_ / "sessions" / (id + ".lock"));
}

std::vector<IQResult> Store::imported_results() const {
  const fs::path path = root_ / "results.json";
  if (!fs::exists(path)) return {};
  const Json json = read_json_file(path);
  if (!json.is_array()) throw Error(ErrorCode::ParseError, path.string(), "expected array of results");
  std::vector<IQResult> out;
  for (std::size_t i = 0; i < json.size(); ++i) {
    out.push_back(iq_result_from_json(json[i], "results[" + std::to_string(i) + "]"));
  }
  return out;
}

void Store::put_imported_results(const std::vector<IQResult>& results) {
  Json json = Json::array();
  for (const auto& r : results) json.push_back(to_json(r));
  write_text_atomic(root_ / "results.json", canonical_dump(json));
}

std::vector<IQResult> Store::all_results() const {
  std::vector<IQResult> out = imported_results();
  for (const auto& summary : sessions()) {
    if (summary.status != SessionStatus::Complete) continue;
    const Session session = load_session(summary.id);
    const Battery b = battery(session.battery);
    out.push_back(session_iq(session, b, session.finished_at.value_or(session.created_at)));
  }
  return out;
}

fs::path save_session(Store& store, const Session& session) { return store.save_session(session); }

Session load_session(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::FileNotFound, path.string(), "no such session file");
  const std::string text = read_text_file(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::ParseError, path.string() + ":1", "empty file");
  }
  Session session = session_from_json(parse_json_text(text, path.string()));
  const Store store(path.parent_path().parent_path());
  const Battery battery = store.battery(session.battery);
  if (auto problem = check_session_consistency(session, battery)) {
    throw Error(ErrorCode::ParseError, path.string(), *problem);
  }
  return session;
}

std::vector<IQResult> latest_per_subject(std::vector<IQResult> results) {
  std::sort(results.begin(), results.end(), [](const IQResult& x, const IQResult& y) {
    if (x.subject_id != y.subject_id) return x.subject_id < y.subject_id;
    if (x.computed_at != y.computed_at) return x.computed_at > y.computed_at;
    return x.session_id > y.session_id;
  });
  std::vector<IQResult> out;
  for (auto& r : results) {
    if (out.empty() || out.back().subject_id != r.subject_id) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace aiq
