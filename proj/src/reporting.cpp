#include "aiq/reporting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include "aiq/error.hpp"

namespace aiq {

RankTable rank_report(const std::vector<IQResult>& results, const std::vector<Subject>& registry, Timestamp as_of) {
  std::set<std::string> seen;
  for (const auto& r : results) {
    if (!seen.insert(r.subject_id).second) {
      throw Error(ErrorCode::DuplicateSubject, r.subject_id, "subject appears more than once");
    }
  }
  std::vector<const IQResult*> order;
  for (const auto& r : results) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const IQResult* x, const IQResult* y) {
    if (x->q_cents != y->q_cents) return x->q_cents > y->q_cents;
    return x->subject_id < y->subject_id;
  });

  RankTable table;
  table.as_of = as_of;
  int rank = 0;
  for (const IQResult* r : order) {
    RankRow row;
    row.rank = ++rank;
    row.subject_id = r->subject_id;
    row.display_name = r->subject_id;
    row.q_cents = r->q_cents;
    for (const auto& s : registry) {
      if (s.id == r->subject_id) {
        row.display_name = s.display_name;
        row.region = s.region;
        row.country = s.country;
        break;
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_rank_text(const RankTable& table) {
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"Rank", "Region", "Country", "Subject", "Absolute IQ"});
  for (const auto& row : table.rows) {
    cells.push_back({std::to_string(row.rank), row.region.value_or(""), row.country.value_or(""), row.display_name,
                     row.q_text()});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t c = 0; c < 5; ++c) {
      const std::string& cell = line[c];
      const std::string pad(width[c] - cell.size(), ' ');
      // numbers right-aligned
      text += (c == 0 || c == 4) ? pad + cell : cell + pad;
      if (c + 1 < 5) text += "  ";
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + "\n";
  }
  return out;
}

std::string rank_csv(const RankTable& table) {
  std::string out = "rank,subject_id,display_name,region,country,Q\r\n";
  for (const auto& row : table.rows) {
    out += std::to_string(row.rank) + "," + csv_field(row.subject_id) + "," + csv_field(row.display_name) + "," +
           csv_field(row.region.value_or("")) + "," + csv_field(row.country.value_or("")) + "," + row.q_text() + "\r\n";
  }
  return out;
}

Json to_json(const RankTable& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    rows.push_back({{"rank", row.rank},
                    {"subject_id", row.subject_id},
                    {"display_name", row.display_name},
                    {"region", row.region ? Json(*row.region) : Json(nullptr)},
                    {"country", row.country ? Json(*row.country) : Json(nullptr)},
                    {"Q", number(static_cast<double>(row.q_cents) / 100.0)},
                    {"Q_text", row.q_text()}});
  }
  return {{"as_of", format_timestamp(table.as_of)}, {"rows", std::move(rows)}};
}

LinearFit fit_line(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw Error(ErrorCode::InsufficientData, "series", "need at least two points");
  LinearFit fit;
  for (const auto& [x, y] : points) {
    fit.x_mean += x;
    fit.y_mean += y;
  }
  fit.x_mean /= static_cast<double>(points.size());
  fit.y_mean /= static_cast<double>(points.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - fit.x_mean) * (x - fit.x_mean);
    sxy += (x - fit.x_mean) * (y - fit.y_mean);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InsufficientData, "series", "all points share one time");
  fit.slope = sxy / sxx;
  return fit;
}

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::A: return "A";
    case Scenario::B: return "B";
    case Scenario::C: return "C";
    case Scenario::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

std::optional<Timestamp> TrendAssessment::crossing_time() const {
  if (!crossing_year) return std::nullopt;
  return from_fractional_year(*crossing_year);
}

namespace {

std::vector<std::pair<double, double>> to_points(const std::string& subject, const std::vector<SeriesPoint>& series) {
  if (series.size() < 2) {
    throw Error(ErrorCode::InsufficientData, subject, "series has " + std::to_string(series.size()) + " point(s)");
  }
  std::vector<std::pair<double, double>> points;
  for (const auto& p : series) points.emplace_back(to_fractional_year(p.t), p.q);
  return points;
}

TrendAssessment assess(const std::string& subject, const std::vector<std::pair<double, double>>& points,
                       const std::string& baseline) {
  TrendAssessment t;
  t.subject_id = subject;
  t.human_baseline = baseline;
  try {
    t.fit = fit_line(points);
  } catch (const Error& e) {
    throw Error(ErrorCode::InsufficientData, subject, e.detail());
  }
  t.slope = t.fit.slope;
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end());
  t.window_start = lo->first;
  t.window_end = hi->first;
  return t;
}

}  // namespace

std::vector<TrendAssessment> trend_report(const SeriesMap& series, const std::string& human_baseline) {
  const auto base_it = series.find(human_baseline);
  if (base_it == series.end()) throw Error(ErrorCode::UnknownBaseline, human_baseline, "no series for baseline");
  const TrendAssessment base = assess(human_baseline, to_points(human_baseline, base_it->second), human_baseline);

  std::vector<TrendAssessment> out;
  for (const auto& [subject, points] : series) {
    TrendAssessment t = assess(subject, to_points(subject, points), human_baseline);
    if (subject == human_baseline) {
      t.scenario = Scenario::B;
      out.push_back(std::move(t));
      continue;
    }
    const double horizon = t.window_end + (t.window_end - t.window_start);
    const double relative_slope = t.fit.slope - base.fit.slope;
    t.scenario = Scenario::Indeterminate;
    if (relative_slope > 0.0) {
      // subject(x) - base(x) = 0
      const double crossing =
          (base.fit.y_mean - base.fit.slope * base.fit.x_mean - t.fit.y_mean + t.fit.slope * t.fit.x_mean) /
          relative_slope;
      const double terminal_gap = base.fit.at(t.window_end) - t.fit.at(t.window_end);
      if (crossing >= t.window_start && crossing <= horizon) {
        t.scenario = Scenario::A;
        t.crossing_year = crossing;
      } else if (crossing > horizon && t.fit.slope > 0.0 && terminal_gap > 0.0) {
        t.scenario = Scenario::C;
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string trend_csv(const std::vector<TrendAssessment>& assessments) {
  std::string out = "subject_id,scenario,slope,crossing_year,crossing_time,human_baseline\r\n";
  for (const auto& a : assessments) {
    out += csv_field(a.subject_id) + "," + std::string(to_string(a.scenario)) + "," + format_number(quantize(a.slope)) +
           ",";
    if (a.crossing_year) out += format_number(*a.crossing_year) + "," + format_timestamp(*a.crossing_time());
    else out += ",";
    out += "," + csv_field(a.human_baseline) + "\r\n";
  }
  return out;
}

Json to_json(const TrendAssessment& a) {
  return {{"subject_id", a.subject_id},
          {"human_baseline", a.human_baseline},
          {"scenario", to_string(a.scenario)},
          {"slope", number(a.slope)},
          {"window_start", number(a.window_start)},
          {"window_end", number(a.window_end)},
          {"crossing_year", a.crossing_year ? number(*a.crossing_year) : Json(nullptr)},
          {"crossing_time", a.crossing_year ? Json(format_timestamp(*a.crossing_time())) : Json(nullptr)}};
}

namespace {

std::filesystem::path write_plain(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::StoreWriteError, path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::StoreWriteError, path.string(), "write failed");
  return path;
}

}  // namespace

std::filesystem::path export_csv(const RankTable& table, const std::filesystem::path& path) {
  return write_plain(path, rank_csv(table));
}

std::filesystem::path export_csv(const std::vector<TrendAssessment>& assessments, const std::filesystem::path& path) {
  return write_plain(path, trend_csv(assessments));
}

}  // namespace aiq
