#include "aiq/administration.hpp"

#include <thread>

#include "aiq/error.hpp"
#include "aiq/scoring.hpp"

namespace aiq {

namespace {

std::string compact_timestamp(Timestamp t) {
  std::string out;
  for (char c : format_timestamp(t)) {
    if (c != '-' && c != ':' && c != '.') out += c;
  }
  return out;
}

}  // namespace

Session start_session(Store& store, const Battery& battery, const std::string& subject_id, const AdapterConfig& cfg,
                      Clock& clock) {
  if (const auto report = validate_battery(battery); !report.empty()) {
    throw Error(ErrorCode::InvalidBattery, report.front().where, report.front().detail);
  }
  if (!store.find_subject(subject_id)) throw Error(ErrorCode::UnknownSubject, subject_id, "subject not registered");
  validate_adapter_config(cfg);
  store.put_battery(battery);

  Session session;
  session.battery = {battery.id, battery.version};
  session.subject_id = subject_id;
  session.adapter = cfg;
  session.created_at = clock.now();
  session.status = SessionStatus::Created;

  const std::string base = subject_id + "-" + compact_timestamp(session.created_at);
  auto lock = FileLock(store.root() / ".sessions.lock");
  session.id = base;
  for (int n = 2; store.has_session(session.id); ++n) session.id = base + "-" + std::to_string(n);
  store.save_session(session);
  return session;
}

Session run_session(Store& store, const std::string& session_id, const AdapterContext& ctx,
                    const RunOptions& options) {
  if (!store.has_session(session_id)) throw Error(ErrorCode::UnknownSession, session_id, "no such session");
  auto lock = store.lock_session(session_id);
  Session session = store.load_session(session_id);
  if (session.status == SessionStatus::Complete || session.status == SessionStatus::AwaitingGrades) return session;
  if (session.status == SessionStatus::Aborted) throw Error(ErrorCode::InvalidState, session_id, "session aborted");
  validate_adapter_config(session.adapter);

  SystemClock system_clock;
  Clock& clock = ctx.clock ? *ctx.clock : static_cast<Clock&>(system_clock);
  AdapterContext item_ctx = ctx;
  item_ctx.clock = &clock;

  const Battery battery = store.battery(session.battery);
  if (session.status == SessionStatus::Created) {
    session.status = SessionStatus::Running;
    session.started_at = clock.now();
    store.save_session(session);
  }

  std::size_t administered = 0;
  for (const TestItem* item : battery.items_in_order()) {
    if (session.responses.contains(item->id)) continue;
    if (administered == options.max_items) return session;
    if (administered > 0 && session.adapter.inter_item_delay > Millis{0}) {
      std::this_thread::sleep_for(session.adapter.inter_item_delay);
    }
    ResponseRecord record = administer_item(session.adapter, *item, item_ctx);
    const ScoreOutcome outcome = score_item(*item, record, record.received_at);
    session.responses[item->id] = std::move(record);
    if (const auto* score = std::get_if<ItemScore>(&outcome)) session.item_scores[item->id] = *score;
    store.save_session(session);
    ++administered;
    if (options.after_item) options.after_item(session, *item);
  }

  if (session.item_scores.size() == battery.item_count()) {
    session.status = SessionStatus::Complete;
    session.finished_at = clock.now();
  } else {
    session.status = SessionStatus::AwaitingGrades;
  }
  store.save_session(session);
  return session;
}

Session abort_session(Store& store, const std::string& session_id, Clock& clock) {
  if (!store.has_session(session_id)) throw Error(ErrorCode::UnknownSession, session_id, "no such session");
  auto lock = store.lock_session(session_id);
  Session session = store.load_session(session_id);
  if (session.status == SessionStatus::Complete) {
    throw Error(ErrorCode::InvalidState, session_id, "session already complete");
  }
  if (session.status != SessionStatus::Aborted) {
    session.status = SessionStatus::Aborted;
    session.finished_at = clock.now();
    store.save_session(session);
  }
  return session;
}

}  // namespace aiq
