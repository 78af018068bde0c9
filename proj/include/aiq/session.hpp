#pragma once

#include <map>
#include <optional>
#include <string>

#include "aiq/adapters.hpp"
#include "aiq/battery.hpp"
#include "aiq/json_util.hpp"
#include "aiq/time.hpp"

namespace aiq {

enum class Category { Human, ArtificialSystem };

std::string_view to_string(Category category);
Category parse_category(std::string_view text);

// A system under test, or a human baseline.
struct Subject {
  std::string id;
  std::string display_name;
  Category category = Category::ArtificialSystem;
  std::optional<std::string> region;
  std::optional<std::string> country;
  std::optional<int> vintage;

  bool operator==(const Subject&) const = default;
};

Json to_json(const Subject& subject);
Subject subject_from_json(const Json& json, const std::string& context);

enum class ScoreMethod { Auto, Manual };

struct ItemScore {
  std::string item_id;
  double points = 0.0;
  ScoreMethod method = ScoreMethod::Auto;
  std::string grader_id;  // Manual only
  bool auto_zero = false;
  Timestamp scored_at{};

  bool operator==(const ItemScore&) const = default;
};

Json to_json(const ItemScore& score);
ItemScore item_score_from_json(const Json& json, const std::string& context);

enum class SessionStatus { Created, Running, AwaitingGrades, Complete, Aborted };

std::string_view to_string(SessionStatus status);
SessionStatus parse_session_status(std::string_view text);

struct BatteryRef {
  std::string id;
  std::string version;
  bool operator==(const BatteryRef&) const = default;
};

// One administration of one battery to one subject.
struct Session {
  std::string id;
  BatteryRef battery;
  std::string subject_id;
  AdapterConfig adapter;
  Timestamp created_at{};
  std::optional<Timestamp> started_at;
  std::optional<Timestamp> finished_at;
  std::map<std::string, ResponseRecord> responses;
  std::map<std::string, ItemScore> item_scores;
  SessionStatus status = SessionStatus::Created;

  bool operator==(const Session&) const = default;
};

Json to_json(const Session& session);
// Structural decode only; reference checks live in the store.
Session session_from_json(const Json& json);

// Items administered but awaiting a manual grade, in battery order.
std::vector<const TestItem*> pending_items(const Session& session, const Battery& battery);

// Checks the session against its battery: responses and scores only for
// known items, scores within bounds, and the status invariants. Returns a
// description of the first problem, or nullopt.
std::optional<std::string> check_session_consistency(const Session& session, const Battery& battery);

}  // namespace aiq
