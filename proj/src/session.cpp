#include "aiq/session.hpp"

#include "aiq/error.hpp"

namespace aiq {

std::string_view to_string(Category category) {
  return category == Category::Human ? "Human" : "ArtificialSystem";
}

Category parse_category(std::string_view text) {
  if (text == "Human") return Category::Human;
  if (text == "ArtificialSystem") return Category::ArtificialSystem;
  throw Error(ErrorCode::ParseError, "category", "unknown category '" + std::string(text) + "'");
}

Json to_json(const Subject& subject) {
  Json j = {{"id", subject.id}, {"display_name", subject.display_name}, {"category", to_string(subject.category)}};
  if (subject.region) j["region"] = *subject.region;
  if (subject.country) j["country"] = *subject.country;
  if (subject.vintage) j["vintage"] = *subject.vintage;
  return j;
}

Subject subject_from_json(const Json& json, const std::string& context) {
  FieldReader r(json, context);
  Subject s;
  s.id = r.string("id");
  s.display_name = r.string("display_name");
  s.category = parse_category(r.string("category"));
  s.region = r.optional_string("region");
  s.country = r.optional_string("country");
  if (r.has("vintage")) s.vintage = static_cast<int>(r.integer("vintage"));
  r.finish();
  return s;
}

Json to_json(const ItemScore& score) {
  Json j = {{"item_id", score.item_id},
            {"points", number(score.points)},
            {"method", score.method == ScoreMethod::Auto ? "Auto" : "Manual"},
            {"auto_zero", score.auto_zero},
            {"scored_at", format_timestamp(score.scored_at)}};
  if (score.method == ScoreMethod::Manual) j["grader_id"] = score.grader_id;
  return j;
}

ItemScore item_score_from_json(const Json& json, const std::string& context) {
  FieldReader r(json, context);
  ItemScore s;
  s.item_id = r.string("item_id");
  s.points = r.number("points");
  const std::string method = r.string("method");
  if (method == "Auto") {
    s.method = ScoreMethod::Auto;
  } else if (method == "Manual") {
    s.method = ScoreMethod::Manual;
    s.grader_id = r.string("grader_id");
  } else {
    throw Error(ErrorCode::ParseError, context + ".method", "unknown method '" + method + "'");
  }
  s.auto_zero = r.boolean("auto_zero");
  s.scored_at = r.timestamp("scored_at");
  r.finish();
  return s;
}

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::Created: return "Created";
    case SessionStatus::Running: return "Running";
    case SessionStatus::AwaitingGrades: return "AwaitingGrades";
    case SessionStatus::Complete: return "Complete";
    case SessionStatus::Aborted: return "Aborted";
  }
  return "Created";
}

SessionStatus parse_session_status(std::string_view text) {
  for (SessionStatus s : {SessionStatus::Created, SessionStatus::Running, SessionStatus::AwaitingGrades,
                          SessionStatus::Complete, SessionStatus::Aborted}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::ParseError, "status", "unknown status '" + std::string(text) + "'");
}

Json to_json(const Session& session) {
  Json responses = Json::object();
  for (const auto& [id, record] : session.responses) responses[id] = to_json(record);
  Json scores = Json::object();
  for (const auto& [id, score] : session.item_scores) scores[id] = to_json(score);
  Json j = {{"id", session.id},
            {"battery", {{"id", session.battery.id}, {"version", session.battery.version}}},
            {"subject_id", session.subject_id},
            {"adapter", to_json(session.adapter)},
            {"created_at", format_timestamp(session.created_at)},
            {"started_at", session.started_at ? Json(format_timestamp(*session.started_at)) : Json(nullptr)},
            {"finished_at", session.finished_at ? Json(format_timestamp(*session.finished_at)) : Json(nullptr)},
            {"responses", std::move(responses)},
            {"item_scores", std::move(scores)},
            {"status", to_string(session.status)}};
  return j;
}

Session session_from_json(const Json& json) {
  FieldReader r(json, "session");
  Session s;
  s.id = r.string("id");
  {
    FieldReader b(r.object("battery"), "session.battery");
    s.battery.id = b.string("id");
    s.battery.version = b.string("version");
    b.finish();
  }
  s.subject_id = r.string("subject_id");
  try {
    s.adapter = adapter_config_from_json(r.object("adapter"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, "session.adapter", e.what());
  }
  s.created_at = r.timestamp("created_at");
  s.started_at = r.optional_timestamp("started_at");
  s.finished_at = r.optional_timestamp("finished_at");
  for (const auto& [id, value] : r.object("responses").items()) {
    ResponseRecord rec = response_from_json(value, "session.responses." + id);
    if (rec.item_id != id) throw Error(ErrorCode::ParseError, "session.responses." + id, "item_id mismatch");
    s.responses.emplace(id, std::move(rec));
  }
  for (const auto& [id, value] : r.object("item_scores").items()) {
    ItemScore score = item_score_from_json(value, "session.item_scores." + id);
    if (score.item_id != id) throw Error(ErrorCode::ParseError, "session.item_scores." + id, "item_id mismatch");
    s.item_scores.emplace(id, std::move(score));
  }
  s.status = parse_session_status(r.string("status"));
  r.finish();
  return s;
}

std::vector<const TestItem*> pending_items(const Session& session, const Battery& battery) {
  std::vector<const TestItem*> out;
  for (const TestItem* item : battery.items_in_order()) {
    if (session.responses.contains(item->id) && !session.item_scores.contains(item->id)) out.push_back(item);
  }
  return out;
}

std::optional<std::string> check_session_consistency(const Session& session, const Battery& battery) {
  for (const auto& [id, record] : session.responses) {
    if (!battery.find_item(id)) return "response for unknown item '" + id + "'";
  }
  for (const auto& [id, score] : session.item_scores) {
    const TestItem* item = battery.find_item(id);
    if (!item) return "score for unknown item '" + id + "'";
    if (!session.responses.contains(id)) return "score without response for item '" + id + "'";
    if (score.points < 0.0 || score.points > item->max_points) return "points out of range for item '" + id + "'";
    if (score.method == ScoreMethod::Manual && item->machine_scorable()) {
      return "manual score on machine-scored item '" + id + "'";
    }
  }
  const std::size_t total = battery.item_count();
  const bool all_administered = session.responses.size() == total;
  const bool all_scored = session.item_scores.size() == total;
  switch (session.status) {
    case SessionStatus::Complete:
      if (!all_scored) return "Complete session with unscored items";
      break;
    case SessionStatus::AwaitingGrades:
      if (!all_administered || all_scored) return "AwaitingGrades requires all items administered and some unscored";
      break;
    case SessionStatus::Created:
    case SessionStatus::Running:
      if (all_scored && total > 0) return "every item scored but status is " + std::string(to_string(session.status));
      break;
    case SessionStatus::Aborted:
      break;
  }
  return std::nullopt;
}

}  // namespace aiq
