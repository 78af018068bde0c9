#include "aiq/battery.hpp"

#include <cmath>
#include <set>

#include "aiq/error.hpp"

namespace aiq {

std::string_view to_string(Ability ability) {
  switch (ability) {
    case Ability::Input: return "Input";
    case Ability::Output: return "Output";
    case Ability::Mastery: return "Mastery";
    case Ability::Creation: return "Creation";
  }
  return "Input";
}

Ability parse_ability(std::string_view text) {
  for (Ability a : kAbilities) {
    if (to_string(a) == text) return a;
  }
  throw Error(ErrorCode::ParseError, "ability", "unknown ability '" + std::string(text) + "'");
}

char ability_symbol(Ability ability) {
  switch (ability) {
    case Ability::Input: return 'I';
    case Ability::Output: return 'O';
    case Ability::Mastery: return 'S';
    case Ability::Creation: return 'C';
  }
  return '?';
}

double WeightVector::operator[](Ability ability) const {
  switch (ability) {
    case Ability::Input: return a;
    case Ability::Output: return b;
    case Ability::Mastery: return c;
    case Ability::Creation: return d;
  }
  return 0.0;
}

std::string_view to_string(Modality modality) {
  switch (modality) {
    case Modality::Text: return "text";
    case Modality::ImageRef: return "image-ref";
    case Modality::AudioRef: return "audio-ref";
  }
  return "text";
}

Modality parse_modality(std::string_view text) {
  for (Modality m : {Modality::Text, Modality::ImageRef, Modality::AudioRef}) {
    if (to_string(m) == text) return m;
  }
  throw Error(ErrorCode::ParseError, "modality", "unknown modality '" + std::string(text) + "'");
}

std::vector<const TestItem*> Battery::items_in_order() const {
  std::vector<const TestItem*> out;
  for (const auto& subtest : subtests) {
    for (const auto& item : subtest.items) out.push_back(&item);
  }
  return out;
}

const TestItem* Battery::find_item(std::string_view item_id) const {
  for (const auto& subtest : subtests) {
    for (const auto& item : subtest.items) {
      if (item.id == item_id) return &item;
    }
  }
  return nullptr;
}

Ability Battery::ability_of(std::string_view item_id) const {
  for (const auto& subtest : subtests) {
    for (const auto& item : subtest.items) {
      if (item.id == item_id) return subtest.ability;
    }
  }
  throw Error(ErrorCode::UnknownItem, std::string(item_id), "not in battery " + id);
}

std::size_t Battery::item_count() const {
  std::size_t n = 0;
  for (const auto& subtest : subtests) n += subtest.items.size();
  return n;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::WeightsSum: return "WeightsSum";
    case ViolationCode::WeightOutOfRange: return "WeightOutOfRange";
    case ViolationCode::EmptyId: return "EmptyId";
    case ViolationCode::DuplicateSubtestId: return "DuplicateSubtestId";
    case ViolationCode::EmptySubtest: return "EmptySubtest";
    case ViolationCode::DuplicateItemId: return "DuplicateItemId";
    case ViolationCode::NonPositiveMaxPoints: return "NonPositiveMaxPoints";
    case ViolationCode::SubtestMaxPointsMismatch: return "SubtestMaxPointsMismatch";
    case ViolationCode::EmptyAnswerKeys: return "EmptyAnswerKeys";
    case ViolationCode::InvalidTolerance: return "InvalidTolerance";
    case ViolationCode::InvalidKeywordPoints: return "InvalidKeywordPoints";
    case ViolationCode::InvalidCap: return "InvalidCap";
    case ViolationCode::InvalidStep: return "InvalidStep";
    case ViolationCode::AbilityUncovered: return "AbilityUncovered";
  }
  return "Unknown";
}

namespace {

constexpr double kPointsTolerance = 1e-9;

void validate_item(const TestItem& item, const std::string& where, ValidationReport& report) {
  if (item.id.empty()) report.push_back({ViolationCode::EmptyId, where, "item id is empty"});
  if (!(item.max_points > 0.0) || !std::isfinite(item.max_points)) {
    report.push_back({ViolationCode::NonPositiveMaxPoints, where,
                      "max_points " + format_number(item.max_points) + " must be > 0"});
  }
  std::visit(
      [&](const auto& mode) {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, ExactMatch>) {
          if (mode.keys.empty()) report.push_back({ViolationCode::EmptyAnswerKeys, where, "no answer keys"});
        } else if constexpr (std::is_same_v<T, NumericAnswer>) {
          if (!(mode.tolerance >= 0.0) || !std::isfinite(mode.value)) {
            report.push_back({ViolationCode::InvalidTolerance, where, "tolerance must be >= 0"});
          }
        } else if constexpr (std::is_same_v<T, KeywordRubric>) {
          if (mode.keywords.empty()) {
            report.push_back({ViolationCode::InvalidKeywordPoints, where, "no keywords"});
          }
          for (const auto& [keyword, points] : mode.keywords) {
            if (keyword.empty() || !(points > 0.0)) {
              report.push_back({ViolationCode::InvalidKeywordPoints, where,
                                "keyword '" + keyword + "' needs a non-empty key and points > 0"});
            }
          }
          if (!(mode.cap > 0.0) || mode.cap > item.max_points + kPointsTolerance) {
            report.push_back({ViolationCode::InvalidCap, where,
                              "cap " + format_number(mode.cap) + " must be in (0, max_points]"});
          }
        } else {
          if (!(mode.step > 0.0) || mode.step > item.max_points + kPointsTolerance) {
            report.push_back({ViolationCode::InvalidStep, where,
                              "step " + format_number(mode.step) + " must be in (0, max_points]"});
          }
        }
      },
      item.scoring);
}

}  // namespace

ValidationReport validate_battery(const Battery& battery) {
  ValidationReport report;
  const WeightVector& w = battery.weights;
  for (Ability a : kAbilities) {
    const double v = w[a];
    if (!(v >= 0.0 && v <= 1.0)) {
      report.push_back({ViolationCode::WeightOutOfRange, "weights",
                        std::string(1, ability_symbol(a)) + "=" + format_number(v) + " outside [0,1]"});
    }
  }
  if (!(std::abs(w.sum() - 1.0) <= kWeightSumTolerance)) {
    report.push_back({ViolationCode::WeightsSum, "weights", "sum " + format_number(w.sum()) + " ≠ 1.0"});
  }
  if (battery.id.empty()) report.push_back({ViolationCode::EmptyId, "id", "battery id is empty"});
  if (battery.version.empty()) report.push_back({ViolationCode::EmptyId, "version", "battery version is empty"});

  std::set<std::string> subtest_ids;
  std::set<std::string> item_ids;  // battery-wide: sessions key responses by item id
  for (std::size_t s = 0; s < battery.subtests.size(); ++s) {
    const Subtest& subtest = battery.subtests[s];
    const std::string where = "subtests[" + std::to_string(s) + "]";
    if (subtest.id.empty()) report.push_back({ViolationCode::EmptyId, where, "subtest id is empty"});
    if (!subtest_ids.insert(subtest.id).second) {
      report.push_back({ViolationCode::DuplicateSubtestId, where, "duplicate subtest id '" + subtest.id + "'"});
    }
    if (subtest.items.empty()) report.push_back({ViolationCode::EmptySubtest, where, "no items"});

    double total = 0.0;
    for (std::size_t i = 0; i < subtest.items.size(); ++i) {
      const TestItem& item = subtest.items[i];
      const std::string item_where = where + ".items[" + std::to_string(i) + "]";
      if (!item_ids.insert(item.id).second) {
        report.push_back({ViolationCode::DuplicateItemId, item_where,
                          "duplicate item id '" + item.id + "' (subtest '" + subtest.id + "')"});
      }
      validate_item(item, item_where, report);
      total += item.max_points;
    }
    if (std::abs(total - subtest.max_points) > kPointsTolerance) {
      report.push_back({ViolationCode::SubtestMaxPointsMismatch, where,
                        "max_points " + format_number(subtest.max_points) + " != item sum " +
                            format_number(total)});
    }
  }

  for (Ability a : kAbilities) {
    bool covered = false;
    for (const auto& subtest : battery.subtests) covered = covered || subtest.ability == a;
    if (!covered) report.push_back({ViolationCode::AbilityUncovered, std::string(to_string(a)), "no subtest"});
  }
  return report;
}

namespace {

ScoringMode scoring_from_json(const Json& json, const std::string& context) {
  FieldReader r(json, context);
  const std::string mode = r.string("mode");
  ScoringMode out;
  if (mode == "ExactMatch") {
    out = ExactMatch{r.string_list("keys")};
  } else if (mode == "KeywordRubric") {
    KeywordRubric k;
    for (const auto& [keyword, points] : r.object("keywords").items()) {
      if (!points.is_number()) throw Error(ErrorCode::ParseError, context + ".keywords." + keyword, "expected number");
      k.keywords.emplace(keyword, quantize(points.get<double>()));
    }
    k.cap = r.number("cap");
    out = std::move(k);
  } else if (mode == "NumericAnswer") {
    NumericAnswer n;
    n.value = r.number("value");
    n.tolerance = r.number("tolerance");
    out = n;
  } else if (mode == "HumanRubric") {
    HumanRubric h;
    h.rubric = r.string("rubric");
    h.step = r.number("step");
    out = std::move(h);
  } else {
    throw Error(ErrorCode::ParseError, context + ".mode", "unknown scoring mode '" + mode + "'");
  }
  r.finish();
  return out;
}

Json scoring_to_json(const ScoringMode& scoring) {
  return std::visit(
      [](const auto& mode) -> Json {
        using T = std::decay_t<decltype(mode)>;
        Json j = Json::object();
        if constexpr (std::is_same_v<T, ExactMatch>) {
          j["mode"] = "ExactMatch";
          j["keys"] = mode.keys;
        } else if constexpr (std::is_same_v<T, KeywordRubric>) {
          j["mode"] = "KeywordRubric";
          Json kw = Json::object();
          for (const auto& [keyword, points] : mode.keywords) kw[keyword] = number(points);
          j["keywords"] = std::move(kw);
          j["cap"] = number(mode.cap);
        } else if constexpr (std::is_same_v<T, NumericAnswer>) {
          j["mode"] = "NumericAnswer";
          j["value"] = number(mode.value);
          j["tolerance"] = number(mode.tolerance);
        } else {
          j["mode"] = "HumanRubric";
          j["rubric"] = mode.rubric;
          j["step"] = number(mode.step);
        }
        return j;
      },
      scoring);
}

TestItem item_from_json(const Json& json, const std::string& context) {
  FieldReader r(json, context);
  TestItem item;
  item.id = r.string("id");
  item.max_points = r.number("max_points");
  {
    FieldReader p(r.object("prompt"), context + ".prompt");
    item.prompt.modality = parse_modality(p.string("modality"));
    item.prompt.content = p.string("content");
    p.finish();
  }
  item.scoring = scoring_from_json(r.object("scoring"), context + ".scoring");
  r.finish();
  return item;
}

}  // namespace

Battery battery_from_json(const Json& json) {
  FieldReader r(json, "");
  Battery b;
  b.id = r.string("id");
  b.version = r.string("version");
  {
    FieldReader w(r.object("weights"), "weights");
    b.weights = WeightVector{w.number("a"), w.number("b"), w.number("c"), w.number("d")};
    w.finish();
  }
  const Json& subtests = r.array("subtests");
  for (std::size_t s = 0; s < subtests.size(); ++s) {
    const std::string context = "subtests[" + std::to_string(s) + "]";
    FieldReader sr(subtests[s], context);
    Subtest subtest;
    subtest.id = sr.string("id");
    subtest.ability = parse_ability(sr.string("ability"));
    subtest.title = sr.string("title");
    subtest.max_points = sr.number("max_points");
    const Json& items = sr.array("items");
    for (std::size_t i = 0; i < items.size(); ++i) {
      subtest.items.push_back(item_from_json(items[i], context + ".items[" + std::to_string(i) + "]"));
    }
    sr.finish();
    b.subtests.push_back(std::move(subtest));
  }
  r.finish();
  return b;
}

Json to_json(const Battery& battery) {
  Json subtests = Json::array();
  for (const auto& subtest : battery.subtests) {
    Json items = Json::array();
    for (const auto& item : subtest.items) {
      items.push_back({{"id", item.id},
                       {"max_points", number(item.max_points)},
                       {"prompt", {{"content", item.prompt.content}, {"modality", to_string(item.prompt.modality)}}},
                       {"scoring", scoring_to_json(item.scoring)}});
    }
    subtests.push_back({{"ability", to_string(subtest.ability)},
                        {"id", subtest.id},
                        {"items", std::move(items)},
                        {"max_points", number(subtest.max_points)},
                        {"title", subtest.title}});
  }
  const WeightVector& w = battery.weights;
  return {{"id", battery.id},
          {"version", battery.version},
          {"weights", {{"a", number(w.a)}, {"b", number(w.b)}, {"c", number(w.c)}, {"d", number(w.d)}}},
          {"subtests", std::move(subtests)}};
}

Battery read_battery_unchecked(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::ParseError, path.string() + ":1", "empty file");
  }
  return battery_from_json(parse_json_text(text, path.string()));
}

Battery load_battery(const std::filesystem::path& path) {
  Battery battery = read_battery_unchecked(path);
  const ValidationReport report = validate_battery(battery);
  if (!report.empty()) {
    throw Error(ErrorCode::SchemaViolation, report.front().where, report.front().detail);
  }
  return battery;
}

void save_battery(const Battery& battery, const std::filesystem::path& path) {
  write_text_atomic(path, canonical_dump(to_json(battery)));
}

}  // namespace aiq
