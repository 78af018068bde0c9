#pragma once

// Intelligence grade classifier. Grades 0 and 1 are decided by I/O alone;
// grades 2..6 form a cumulative ladder:
//   2  storage present (alpha > 0, fixed or growing)
//   3  alpha grows over time
//   4  knowledge shared with other systems
//   5  knowledge creation
//   6  I, O, S and C all declared unbounded

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aiq/battery.hpp"
#include "aiq/json_util.hpp"
#include "aiq/time.hpp"

namespace aiq {

enum class StorageTrend { Empty, Zero, Fixed, Increasing };

std::string_view to_string(StorageTrend trend);

struct StorageObservation {
  Timestamp t{};
  double alpha = 0.0;
  bool operator==(const StorageObservation&) const = default;
};

// Throws UnsortedObservations unless t is strictly increasing.
StorageTrend storage_trend(std::span<const StorageObservation> observations, double eps = 0.0);

struct CapabilityProfile {
  std::string subject_id;
  bool input_positive = false;
  bool output_positive = false;
  std::vector<StorageObservation> storage_observations;
  bool sharing = false;
  bool creation_positive = false;
  std::set<Ability> unbounded;
  std::map<std::string, std::string> evidence_notes;

  bool operator==(const CapabilityProfile&) const = default;
};

CapabilityProfile profile_from_json(const Json& json);
Json to_json(const CapabilityProfile& profile);
CapabilityProfile load_profile(const std::filesystem::path& path);

// Condition codes used in matched_conditions / next_grade_gaps.
namespace condition {
inline constexpr std::string_view kInputPositive = "input_positive";
inline constexpr std::string_view kOutputPositive = "output_positive";
inline constexpr std::string_view kInputZero = "input_zero";
inline constexpr std::string_view kOutputZero = "output_zero";
inline constexpr std::string_view kStoragePresent = "storage_present";
inline constexpr std::string_view kStorageIncreasing = "storage_increasing";
inline constexpr std::string_view kSharing = "sharing";
inline constexpr std::string_view kCreationPositive = "creation_positive";
inline constexpr std::string_view kUnboundedI = "unbounded_I";
inline constexpr std::string_view kUnboundedO = "unbounded_O";
inline constexpr std::string_view kUnboundedS = "unbounded_S";
inline constexpr std::string_view kUnboundedC = "unbounded_C";
}  // namespace condition

inline constexpr int kMaxGrade = 6;

struct GradeResult {
  int grade = 0;
  StorageTrend trend = StorageTrend::Empty;
  std::vector<std::string> matched_conditions;
  std::vector<std::string> next_grade_gaps;  // empty iff grade == 6
  bool degenerate = false;                   // grades 0 and 1
  std::vector<std::string> notes;

  bool operator==(const GradeResult&) const = default;
};

Json to_json(const GradeResult& result);

// Throws ProfileInvalid when the profile breaks its invariants.
void validate_profile(const CapabilityProfile& profile);

GradeResult classify_grade(const CapabilityProfile& profile, double eps = 0.0);

}  // namespace aiq
