#include "aiq/grading.hpp"

#include <cmath>

#include "aiq/error.hpp"

namespace aiq {

std::string_view to_string(StorageTrend trend) {
  switch (trend) {
    case StorageTrend::Empty: return "Empty";
    case StorageTrend::Zero: return "Zero";
    case StorageTrend::Fixed: return "Fixed";
    case StorageTrend::Increasing: return "Increasing";
  }
  return "Empty";
}

StorageTrend storage_trend(std::span<const StorageObservation> observations, double eps) {
  for (std::size_t i = 1; i < observations.size(); ++i) {
    if (!(observations[i - 1].t < observations[i].t)) {
      throw Error(ErrorCode::UnsortedObservations, "storage_observations[" + std::to_string(i) + "]",
                  "t must be strictly increasing");
    }
  }
  if (observations.empty()) return StorageTrend::Empty;
  bool all_zero = true;
  for (const auto& o : observations) all_zero = all_zero && o.alpha <= eps;
  if (all_zero) return StorageTrend::Zero;
  if (observations.size() >= 2 && observations.back().alpha > observations.front().alpha + eps) {
    return StorageTrend::Increasing;
  }
  return StorageTrend::Fixed;
}

CapabilityProfile profile_from_json(const Json& json) {
  FieldReader r(json, "profile");
  CapabilityProfile p;
  p.subject_id = r.string("subject_id");
  p.input_positive = r.boolean("input_positive");
  p.output_positive = r.boolean("output_positive");
  const Json& obs = r.array("storage_observations");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    FieldReader o(obs[i], "profile.storage_observations[" + std::to_string(i) + "]");
    p.storage_observations.push_back({o.timestamp("t"), o.number("alpha")});
    o.finish();
  }
  p.sharing = r.boolean("sharing");
  p.creation_positive = r.boolean("creation_positive");
  for (const auto& marker : r.string_list("unbounded")) {
    bool known = false;
    for (Ability a : kAbilities) {
      if (marker.size() == 1 && marker[0] == ability_symbol(a)) {
        p.unbounded.insert(a);
        known = true;
      }
    }
    if (!known) throw Error(ErrorCode::ParseError, "profile.unbounded", "unknown marker '" + marker + "'");
  }
  if (r.has("evidence_notes")) p.evidence_notes = r.string_map("evidence_notes");
  r.finish();
  return p;
}

Json to_json(const CapabilityProfile& profile) {
  Json obs = Json::array();
  for (const auto& o : profile.storage_observations) {
    obs.push_back({{"t", format_timestamp(o.t)}, {"alpha", number(o.alpha)}});
  }
  Json unbounded = Json::array();
  for (Ability a : profile.unbounded) unbounded.push_back(std::string(1, ability_symbol(a)));
  return {{"subject_id", profile.subject_id},
          {"input_positive", profile.input_positive},
          {"output_positive", profile.output_positive},
          {"storage_observations", std::move(obs)},
          {"sharing", profile.sharing},
          {"creation_positive", profile.creation_positive},
          {"unbounded", std::move(unbounded)},
          {"evidence_notes", profile.evidence_notes}};
}

CapabilityProfile load_profile(const std::filesystem::path& path) {
  return profile_from_json(read_json_file(path));
}

Json to_json(const GradeResult& result) {
  return {{"grade", result.grade},
          {"storage_trend", to_string(result.trend)},
          {"matched_conditions", result.matched_conditions},
          {"next_grade_gaps", result.next_grade_gaps},
          {"degenerate", result.degenerate},
          {"notes", result.notes}};
}

void validate_profile(const CapabilityProfile& p) {
  for (std::size_t i = 0; i < p.storage_observations.size(); ++i) {
    const auto& o = p.storage_observations[i];
    if (!(o.alpha >= 0.0) || !std::isfinite(o.alpha)) {
      throw Error(ErrorCode::ProfileInvalid, "storage_observations[" + std::to_string(i) + "].alpha",
                  "alpha must be finite and >= 0");
    }
    if (i > 0 && !(p.storage_observations[i - 1].t < o.t)) {
      throw Error(ErrorCode::ProfileInvalid, "storage_observations[" + std::to_string(i) + "].t",
                  "t must be strictly increasing");
    }
  }
  const auto require = [&](Ability a, bool evidence, std::string_view what) {
    if (p.unbounded.contains(a) && !evidence) {
      throw Error(ErrorCode::ProfileInvalid, "unbounded", std::string(1, ability_symbol(a)) + " marker requires " +
                                                             std::string(what));
    }
  };
  require(Ability::Input, p.input_positive, "input_positive");
  require(Ability::Output, p.output_positive, "output_positive");
  require(Ability::Mastery, !p.storage_observations.empty(), "storage observations");
  require(Ability::Creation, p.creation_positive, "creation_positive");
}

namespace {

std::string unbounded_code(Ability a) {
  switch (a) {
    case Ability::Input: return std::string(condition::kUnboundedI);
    case Ability::Output: return std::string(condition::kUnboundedO);
    case Ability::Mastery: return std::string(condition::kUnboundedS);
    case Ability::Creation: return std::string(condition::kUnboundedC);
  }
  return {};
}

}  // namespace

GradeResult classify_grade(const CapabilityProfile& p, double eps) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::ProfileInvalid, "eps", "eps must be >= 0");
  validate_profile(p);

  GradeResult result;
  result.trend = storage_trend(p.storage_observations, eps);
  auto& matched = result.matched_conditions;
  auto& gaps = result.next_grade_gaps;

  if (p.input_positive != p.output_positive) {
    result.grade = 0;
    result.degenerate = true;
    matched.emplace_back(p.input_positive ? condition::kInputPositive : condition::kOutputPositive);
    matched.emplace_back(p.input_positive ? condition::kOutputZero : condition::kInputZero);
    gaps.emplace_back(p.input_positive ? condition::kOutputPositive : condition::kInputPositive);
    result.notes.emplace_back("one-way I/O: trivial system, other capabilities are not assessed");
    return result;
  }
  if (!p.input_positive) {
    result.grade = 1;
    result.degenerate = true;
    matched.emplace_back(condition::kInputZero);
    matched.emplace_back(condition::kOutputZero);
    gaps.emplace_back(condition::kInputPositive);
    gaps.emplace_back(condition::kOutputPositive);
    result.notes.emplace_back("no information exchange with testers; other capabilities are not assessed");
    return result;
  }

  matched.emplace_back(condition::kInputPositive);
  matched.emplace_back(condition::kOutputPositive);

  struct Rung {
    int grade;
    std::vector<std::string> unmet;
    std::vector<std::string> met;
  };
  const auto single = [](int grade, bool ok, std::string_view code) {
    return ok ? Rung{grade, {}, {std::string(code)}} : Rung{grade, {std::string(code)}, {}};
  };
  std::vector<Rung> ladder;
  ladder.push_back(single(2, result.trend == StorageTrend::Fixed || result.trend == StorageTrend::Increasing,
                          condition::kStoragePresent));
  ladder.push_back(single(3, result.trend == StorageTrend::Increasing, condition::kStorageIncreasing));
  ladder.push_back(single(4, p.sharing, condition::kSharing));
  ladder.push_back(single(5, p.creation_positive, condition::kCreationPositive));
  Rung top{6, {}, {}};
  for (Ability a : kAbilities) (p.unbounded.contains(a) ? top.met : top.unmet).push_back(unbounded_code(a));
  ladder.push_back(std::move(top));

  int grade = 0;
  for (const Rung& rung : ladder) {
    if (!rung.unmet.empty()) {
      gaps = rung.unmet;
      break;
    }
    grade = rung.grade;
    matched.insert(matched.end(), rung.met.begin(), rung.met.end());
  }

  if (grade == 0) {
    result.degenerate = true;
    result.notes.emplace_back("two-way I/O without stored knowledge: trivial system");
  }
  result.grade = grade;
  if (p.creation_positive && grade < 5) {
    result.notes.emplace_back(p.sharing ? "creation present but lower ladder conditions are unmet"
                                        : "creation present but knowledge is not shared");
  }
  if (!p.unbounded.empty() && grade < kMaxGrade) {
    result.notes.emplace_back("unbounded markers declared but the ladder stops at grade " + std::to_string(grade));
  }
  return result;
}

}  // namespace aiq
