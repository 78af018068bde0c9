#pragma once

// Test batteries: versioned, ability-grouped sub-tests with machine- or
// human-scored items. Batteries are immutable once loaded.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aiq/json_util.hpp"

namespace aiq {

enum class Ability { Input, Output, Mastery, Creation };

inline constexpr std::array<Ability, 4> kAbilities{Ability::Input, Ability::Output, Ability::Mastery,
                                                   Ability::Creation};

std::string_view to_string(Ability ability);
Ability parse_ability(std::string_view text);
// Single-letter symbol: I, O, S, C.
char ability_symbol(Ability ability);

struct WeightVector {
  double a = 0.25;  // Input
  double b = 0.25;  // Output
  double c = 0.25;  // Mastery
  double d = 0.25;  // Creation

  double operator[](Ability ability) const;
  double sum() const { return a + b + c + d; }
  bool operator==(const WeightVector&) const = default;
};

inline constexpr double kWeightSumTolerance = 1e-9;

enum class Modality { Text, ImageRef, AudioRef };

std::string_view to_string(Modality modality);
Modality parse_modality(std::string_view text);

struct Prompt {
  Modality modality = Modality::Text;
  std::string content;  // text, or a URI for media
  bool operator==(const Prompt&) const = default;
};

struct ExactMatch {
  std::vector<std::string> keys;
  bool operator==(const ExactMatch&) const = default;
};

struct KeywordRubric {
  std::map<std::string, double> keywords;  // keyword -> points
  double cap = 0.0;
  bool operator==(const KeywordRubric&) const = default;
};

struct NumericAnswer {
  double value = 0.0;
  double tolerance = 0.0;
  bool operator==(const NumericAnswer&) const = default;
};

struct HumanRubric {
  std::string rubric;
  double step = 1.0;  // manual points must be a multiple of this
  bool operator==(const HumanRubric&) const = default;
};

using ScoringMode = std::variant<ExactMatch, KeywordRubric, NumericAnswer, HumanRubric>;

struct TestItem {
  std::string id;
  Prompt prompt;
  double max_points = 1.0;
  ScoringMode scoring;

  bool machine_scorable() const { return !std::holds_alternative<HumanRubric>(scoring); }
  bool operator==(const TestItem&) const = default;
};

struct Subtest {
  std::string id;
  Ability ability = Ability::Input;
  std::string title;
  std::vector<TestItem> items;
  double max_points = 0.0;

  bool operator==(const Subtest&) const = default;
};

struct Battery {
  std::string id;
  std::string version;
  WeightVector weights;
  std::vector<Subtest> subtests;

  // Items in administration order (subtest order, then item order).
  std::vector<const TestItem*> items_in_order() const;
  const TestItem* find_item(std::string_view item_id) const;
  // Ability of the subtest containing the item; item must exist.
  Ability ability_of(std::string_view item_id) const;
  std::size_t item_count() const;

  bool operator==(const Battery&) const = default;
};

enum class ViolationCode {
  WeightsSum,
  WeightOutOfRange,
  EmptyId,
  DuplicateSubtestId,
  EmptySubtest,
  DuplicateItemId,
  NonPositiveMaxPoints,
  SubtestMaxPointsMismatch,
  EmptyAnswerKeys,
  InvalidTolerance,
  InvalidKeywordPoints,
  InvalidCap,
  InvalidStep,
  AbilityUncovered,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string where;   // "weights", "subtests[2]", "subtests[2].items[0]", ability name...
  std::string detail;
  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

// Every invariant violation, in a fixed order: weights, then each subtest in
// battery order (ids, items, point totals), then ability coverage.
ValidationReport validate_battery(const Battery& battery);

// Strict decode without invariant checks; unknown or missing fields are
// ParseError.
Battery battery_from_json(const Json& json);
Json to_json(const Battery& battery);

// Parse only (FileNotFound / ParseError); used by the validator CLI so that
// every violation can be reported.
Battery read_battery_unchecked(const std::filesystem::path& path);
// Parse + validate; the first violation is thrown as SchemaViolation.
Battery load_battery(const std::filesystem::path& path);
void save_battery(const Battery& battery, const std::filesystem::path& path);

}  // namespace aiq
