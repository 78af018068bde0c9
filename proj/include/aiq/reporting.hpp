#pragma once

// Ranking tables and longitudinal trend labelling.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aiq/scoring.hpp"
#include "aiq/session.hpp"

namespace aiq {

struct RankRow {
  int rank = 0;
  std::string subject_id;
  std::string display_name;
  std::optional<std::string> region;
  std::optional<std::string> country;
  std::int64_t q_cents = 0;

  std::string q_text() const { return format_cents(q_cents); }
  bool operator==(const RankRow&) const = default;
};

struct RankTable {
  Timestamp as_of{};
  std::vector<RankRow> rows;
};

// Descending Q (hundredths); ties broken by subject id ascending, each row
// getting its own consecutive rank. Subjects missing from the registry are
// shown by id. Throws DuplicateSubject.
RankTable rank_report(const std::vector<IQResult>& results, const std::vector<Subject>& registry,
                      Timestamp as_of = {});

// Columns: rank, region, country, subject, Absolute IQ.
std::string render_rank_text(const RankTable& table);
// Columns: rank,subject_id,display_name,region,country,Q
std::string rank_csv(const RankTable& table);
Json to_json(const RankTable& table);

struct SeriesPoint {
  Timestamp t{};
  double q = 0.0;
};

using SeriesMap = std::map<std::string, std::vector<SeriesPoint>>;

// Least-squares line through (year, Q) points, stored around its centroid.
struct LinearFit {
  double x_mean = 0.0;
  double y_mean = 0.0;
  double slope = 0.0;

  double at(double x) const { return y_mean + slope * (x - x_mean); }
};

// Throws InsufficientData for fewer than two points or no spread in x.
LinearFit fit_line(const std::vector<std::pair<double, double>>& points);

enum class Scenario { A, B, C, Indeterminate };

std::string_view to_string(Scenario scenario);

struct TrendAssessment {
  std::string subject_id;
  std::string human_baseline;
  LinearFit fit;
  double slope = 0.0;  // IQ points per year
  double window_start = 0.0;
  double window_end = 0.0;
  Scenario scenario = Scenario::Indeterminate;
  std::optional<double> crossing_year;

  std::optional<Timestamp> crossing_time() const;
};

// Scenario rules, for each non-baseline subject over its own observation
// window [t0, t1] and horizon t1 + (t1 - t0):
//   A  fitted line crosses above the baseline's fitted line in [t0, horizon]
//   C  rising, gap to the baseline shrinking, no crossing by the horizon
//   Indeterminate otherwise
// The baseline itself is labelled B. Results are ordered by subject id.
std::vector<TrendAssessment> trend_report(const SeriesMap& series, const std::string& human_baseline);

// Columns: subject_id,scenario,slope,crossing_year,crossing_time,human_baseline
std::string trend_csv(const std::vector<TrendAssessment>& assessments);
Json to_json(const TrendAssessment& assessment);

// Throws StoreWriteError.
std::filesystem::path export_csv(const RankTable& table, const std::filesystem::path& path);
std::filesystem::path export_csv(const std::vector<TrendAssessment>& assessments, const std::filesystem::path& path);

}  // namespace aiq
