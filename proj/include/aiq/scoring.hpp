#pragma once

// Item scoring, per-ability aggregation and the weighted IQ
//   Q = a*f(I) + b*f(O) + c*f(S) + d*f(C),  a+b+c+d = 1.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aiq/adapters.hpp"
#include "aiq/battery.hpp"
#include "aiq/session.hpp"

namespace aiq {

class Store;

// Trim, ASCII case-fold, collapse internal whitespace runs to one space.
std::string normalize_text(std::string_view text);

struct PendingHumanGrade {
  std::string item_id;
  bool operator==(const PendingHumanGrade&) const = default;
};

using ScoreOutcome = std::variant<ItemScore, PendingHumanGrade>;

ScoreOutcome score_item(const TestItem& item, const ResponseRecord& response, Timestamp scored_at);

// Points for a KeywordRubric response: each keyword counts once when it
// occurs as a whole-word match in the normalized response; the sum is capped.
double keyword_points(const KeywordRubric& rubric, std::string_view response);

// Records a grade for a pending HumanRubric item under the session writer
// lock and persists it. Moves the session to Complete when nothing is left
// pending.
Session record_manual_score(Store& store, const std::string& session_id, const std::string& item_id, double points,
                            const std::string& grader_id, Clock& clock);

// f values on a 0..100 scale (percent of attainable points).
struct AbilityScores {
  double f_I = 0.0;
  double f_O = 0.0;
  double f_S = 0.0;
  double f_C = 0.0;

  double operator[](Ability ability) const;
  double& operator[](Ability ability);
  bool operator==(const AbilityScores&) const = default;
};

// Requires a Complete session; throws SessionIncomplete otherwise.
AbilityScores ability_scores(const Session& session, const Battery& battery);
// Per-ability values that are already computable (every item of that ability
// scored), regardless of session status.
std::array<std::optional<double>, 4> partial_ability_scores(const Session& session, const Battery& battery);

// Display value of Q in hundredths, rounded half-up.
std::int64_t round_half_up_cents(double value);
std::string format_cents(std::int64_t cents);

struct IQResult {
  std::string subject_id;
  std::string session_id;  // empty for imported published values
  double q_raw = 0.0;
  std::int64_t q_cents = 0;
  WeightVector weights;
  std::optional<AbilityScores> ability_scores;  // absent for imported values
  Timestamp computed_at{};

  double q() const { return static_cast<double>(q_cents) / 100.0; }
  std::string q_text() const { return format_cents(q_cents); }
  bool operator==(const IQResult&) const = default;
};

// Throws InvalidWeights. Subject/session refs are left empty.
IQResult compute_iq(const AbilityScores& scores, const WeightVector& weights, Timestamp computed_at = {});
// ability_scores + compute_iq with refs filled in.
IQResult session_iq(const Session& session, const Battery& battery, Timestamp computed_at);

// A published value with no ability breakdown.
IQResult imported_result(std::string subject_id, double q, Timestamp computed_at);

Json to_json(const IQResult& result);
IQResult iq_result_from_json(const Json& json, const std::string& context);

// Columns: subject_id,Q,f_I,f_O,f_S,f_C,computed_at
std::string results_csv(const std::vector<IQResult>& results);

}  // namespace aiq
