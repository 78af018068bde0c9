#include "aiq/scoring.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "aiq/error.hpp"
#include "aiq/store.hpp"

namespace aiq {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

// Bytes >= 0x80 belong to UTF-8 sequences and count as word characters.
bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
  }
  return out;
}

double keyword_points(const KeywordRubric& rubric, std::string_view response) {
  const std::string haystack = normalize_text(response);
  double total = 0.0;
  for (const auto& [keyword, points] : rubric.keywords) {
    const std::string needle = normalize_text(keyword);
    if (needle.empty()) continue;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
      const bool left_ok = pos == 0 || !is_word_char(static_cast<unsigned char>(haystack[pos - 1]));
      const std::size_t end = pos + needle.size();
      const bool right_ok = end == haystack.size() || !is_word_char(static_cast<unsigned char>(haystack[end]));
      if (left_ok && right_ok) {
        total += points;
        break;
      }
    }
  }
  return std::min(total, rubric.cap);
}

namespace {

std::optional<double> parse_number(std::string_view text) {
  const std::string trimmed = normalize_text(text);
  std::string_view view = trimmed;
  if (!view.empty() && view.front() == '+') view.remove_prefix(1);
  if (view.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), value);
  if (ec != std::errc{} || ptr != view.data() + view.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

ScoreOutcome score_item(const TestItem& item, const ResponseRecord& response, Timestamp scored_at) {
  if (response.item_id != item.id) {
    throw Error(ErrorCode::ItemResponseMismatch, response.item_id, "response does not belong to item " + item.id);
  }
  ItemScore score;
  score.item_id = item.id;
  score.method = ScoreMethod::Auto;
  score.scored_at = scored_at;
  if (response.outcome != Outcome::Answered) {
    score.auto_zero = true;
    return score;
  }
  const double earned = std::visit(
      [&](const auto& mode) -> double {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, ExactMatch>) {
          const std::string answer = normalize_text(response.raw_response);
          for (const auto& key : mode.keys) {
            if (normalize_text(key) == answer) return item.max_points;
          }
          return 0.0;
        } else if constexpr (std::is_same_v<T, NumericAnswer>) {
          const auto value = parse_number(response.raw_response);
          return value && std::abs(*value - mode.value) <= mode.tolerance ? item.max_points : 0.0;
        } else if constexpr (std::is_same_v<T, KeywordRubric>) {
          return keyword_points(mode, response.raw_response);
        } else {
          return -1.0;
        }
      },
      item.scoring);
  if (earned < 0.0) return PendingHumanGrade{item.id};
  score.points = std::clamp(earned, 0.0, item.max_points);
  return score;
}

Session record_manual_score(Store& store, const std::string& session_id, const std::string& item_id, double points,
                            const std::string& grader_id, Clock& clock) {
  if (!store.has_session(session_id)) throw Error(ErrorCode::UnknownSession, session_id, "no such session");
  auto lock = store.lock_session(session_id);
  Session session = store.load_session(session_id);
  const Battery battery = store.battery(session.battery);
  const TestItem* item = battery.find_item(item_id);
  if (!item) throw Error(ErrorCode::UnknownItem, item_id, "not in battery " + battery.id);
  if (session.status == SessionStatus::Aborted) throw Error(ErrorCode::InvalidState, session_id, "session aborted");
  if (item->machine_scorable() || !session.responses.contains(item_id) || session.item_scores.contains(item_id)) {
    throw Error(ErrorCode::NotPending, item_id, "item is not awaiting a manual grade");
  }
  if (grader_id.empty()) throw Error(ErrorCode::OutOfRange, "grader_id", "grader id is required");
  const double step = std::get<HumanRubric>(item->scoring).step;
  const double steps = points / step;
  if (!std::isfinite(points) || points < 0.0 || points > item->max_points ||
      std::abs(steps - std::round(steps)) > 1e-9) {
    throw Error(ErrorCode::OutOfRange, item_id,
                "points " + format_number(points) + " not on scale 0.." + format_number(item->max_points) +
                    " step " + format_number(step));
  }
  const Timestamp now = clock.now();
  session.item_scores[item_id] = ItemScore{item_id, quantize(points), ScoreMethod::Manual, grader_id, false, now};
  if (session.item_scores.size() == battery.item_count()) {
    session.status = SessionStatus::Complete;
    session.finished_at = now;
  }
  store.save_session(session);
  return session;
}

double AbilityScores::operator[](Ability ability) const {
  switch (ability) {
    case Ability::Input: return f_I;
    case Ability::Output: return f_O;
    case Ability::Mastery: return f_S;
    case Ability::Creation: return f_C;
  }
  return 0.0;
}

double& AbilityScores::operator[](Ability ability) {
  switch (ability) {
    case Ability::Input: return f_I;
    case Ability::Output: return f_O;
    case Ability::Mastery: return f_S;
    case Ability::Creation: return f_C;
  }
  return f_I;
}

std::array<std::optional<double>, 4> partial_ability_scores(const Session& session, const Battery& battery) {
  std::array<std::optional<double>, 4> out;
  for (std::size_t k = 0; k < kAbilities.size(); ++k) {
    double earned = 0.0;
    double attainable = 0.0;
    bool complete = true;
    for (const auto& subtest : battery.subtests) {
      if (subtest.ability != kAbilities[k]) continue;
      for (const auto& item : subtest.items) {
        attainable += item.max_points;
        auto it = session.item_scores.find(item.id);
        if (it == session.item_scores.end()) {
          complete = false;
        } else {
          earned += it->second.points;
        }
      }
    }
    if (complete && attainable > 0.0) out[k] = 100.0 * earned / attainable;
  }
  return out;
}

AbilityScores ability_scores(const Session& session, const Battery& battery) {
  if (session.status != SessionStatus::Complete) {
    throw Error(ErrorCode::SessionIncomplete, session.id, "status is " + std::string(to_string(session.status)));
  }
  const auto partial = partial_ability_scores(session, battery);
  AbilityScores scores;
  for (std::size_t k = 0; k < kAbilities.size(); ++k) {
    if (!partial[k]) throw Error(ErrorCode::SessionIncomplete, session.id, "unscored items remain");
    scores[kAbilities[k]] = *partial[k];
  }
  return scores;
}

std::int64_t round_half_up_cents(double value) {
  return static_cast<std::int64_t>(std::floor(value * 100.0 + 0.5 + 1e-9));
}

std::string format_cents(std::int64_t cents) {
  const bool negative = cents < 0;
  const std::int64_t magnitude = negative ? -cents : cents;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", negative ? "-" : "", static_cast<long long>(magnitude / 100),
                static_cast<long long>(magnitude % 100));
  return buf;
}

IQResult compute_iq(const AbilityScores& scores, const WeightVector& weights, Timestamp computed_at) {
  for (Ability a : kAbilities) {
    if (!(weights[a] >= 0.0 && weights[a] <= 1.0)) {
      throw Error(ErrorCode::InvalidWeights, std::string(1, ability_symbol(a)), "weight outside [0,1]");
    }
    if (!(scores[a] >= 0.0 && scores[a] <= 100.0)) {
      throw Error(ErrorCode::OutOfRange, std::string(1, ability_symbol(a)), "ability score outside [0,100]");
    }
  }
  if (!(std::abs(weights.sum() - 1.0) <= kWeightSumTolerance)) {
    throw Error(ErrorCode::InvalidWeights, "weights", "sum " + format_number(weights.sum()) + " ≠ 1.0");
  }
  IQResult result;
  result.q_raw = weights.a * scores.f_I + weights.b * scores.f_O + weights.c * scores.f_S + weights.d * scores.f_C;
  result.q_cents = std::clamp<std::int64_t>(round_half_up_cents(result.q_raw), 0, 10000);
  result.weights = weights;
  result.ability_scores = scores;
  result.computed_at = computed_at;
  return result;
}

IQResult session_iq(const Session& session, const Battery& battery, Timestamp computed_at) {
  IQResult result = compute_iq(ability_scores(session, battery), battery.weights, computed_at);
  result.subject_id = session.subject_id;
  result.session_id = session.id;
  return result;
}

IQResult imported_result(std::string subject_id, double q, Timestamp computed_at) {
  IQResult result;
  result.subject_id = std::move(subject_id);
  result.q_raw = q;
  result.q_cents = round_half_up_cents(q);
  result.computed_at = computed_at;
  return result;
}

Json to_json(const IQResult& result) {
  Json scores = nullptr;
  if (result.ability_scores) {
    const AbilityScores& s = *result.ability_scores;
    scores = {{"f_I", number(s.f_I)}, {"f_O", number(s.f_O)}, {"f_S", number(s.f_S)}, {"f_C", number(s.f_C)}};
  }
  const WeightVector& w = result.weights;
  return {{"subject_id", result.subject_id},
          {"session_id", result.session_id},
          {"Q", number(result.q())},
          {"q_raw", number(result.q_raw)},
          {"weights", {{"a", number(w.a)}, {"b", number(w.b)}, {"c", number(w.c)}, {"d", number(w.d)}}},
          {"ability_scores", std::move(scores)},
          {"computed_at", format_timestamp(result.computed_at)}};
}

IQResult iq_result_from_json(const Json& json, const std::string& context) {
  FieldReader r(json, context);
  IQResult result;
  result.subject_id = r.string("subject_id");
  result.session_id = r.optional_string("session_id").value_or("");
  result.q_cents = round_half_up_cents(r.number("Q"));
  result.q_raw = r.has("q_raw") ? r.number("q_raw") : result.q();
  if (r.has("weights")) {
    FieldReader w(r.object("weights"), context + ".weights");
    result.weights = WeightVector{w.number("a"), w.number("b"), w.number("c"), w.number("d")};
    w.finish();
  }
  if (r.has("ability_scores") && !r.get("ability_scores").is_null()) {
    FieldReader s(r.object("ability_scores"), context + ".ability_scores");
    result.ability_scores = AbilityScores{s.number("f_I"), s.number("f_O"), s.number("f_S"), s.number("f_C")};
    s.finish();
  }
  result.computed_at = r.timestamp("computed_at");
  r.finish();
  return result;
}

std::string results_csv(const std::vector<IQResult>& results) {
  std::string out = "subject_id,Q,f_I,f_O,f_S,f_C,computed_at\r\n";
  for (const auto& r : results) {
    out += csv_field(r.subject_id) + "," + r.q_text();
    for (Ability a : kAbilities) {
      out += ",";
      if (r.ability_scores) out += format_cents(round_half_up_cents((*r.ability_scores)[a]));
    }
    out += "," + format_timestamp(r.computed_at) + "\r\n";
  }
  return out;
}

}  // namespace aiq
