#include "aiq/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "aiq/administration.hpp"
#include "aiq/api_server.hpp"
#include "aiq/error.hpp"
#include "aiq/grading.hpp"
#include "aiq/reporting.hpp"
#include "aiq/scoring.hpp"
#include "aiq/store.hpp"

namespace aiq {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::string resolve_store(const std::string& flag) {
  if (const char* env = std::getenv("AIQ_STORE"); env && *env) return env;
  return flag;
}

int resolve_port(int flag) {
  if (const char* env = std::getenv("AIQ_PORT"); env && *env) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value >= 0 && value <= 65535) return static_cast<int>(value);
  }
  return flag;
}

void print_violations(std::ostream& out, const ValidationReport& report) {
  for (const auto& v : report) {
    out << "SchemaViolation(" << v.where << "): " << to_string(v.code) << ": " << v.detail << "\n";
  }
}

void print_session(std::ostream& out, const Session& session, const Battery& battery) {
  out << "session: " << session.id << "\n"
      << "subject: " << session.subject_id << "\n"
      << "battery: " << session.battery.id << " " << session.battery.version << "\n"
      << "adapter: " << to_string(session.adapter.kind) << "\n"
      << "status: " << to_string(session.status) << "\n"
      << "administered: " << session.responses.size() << "/" << battery.item_count() << "\n"
      << "pending grades: " << pending_items(session, battery).size() << "\n";
  const auto partial = partial_ability_scores(session, battery);
  for (std::size_t k = 0; k < kAbilities.size(); ++k) {
    out << "f(" << ability_symbol(kAbilities[k]) << "): "
        << (partial[k] ? format_cents(round_half_up_cents(*partial[k])) : std::string("-")) << "\n";
  }
  if (session.status == SessionStatus::Complete) {
    out << "Q: " << session_iq(session, battery, session.finished_at.value_or(session.created_at)).q_text() << "\n";
  }
}

void print_grade(std::ostream& out, const GradeResult& result) {
  const auto join = [](const std::vector<std::string>& items) {
    std::string s;
    for (const auto& item : items) s += (s.empty() ? "" : ", ") + item;
    return s.empty() ? std::string("(none)") : s;
  };
  out << "grade: " << result.grade << "\n"
      << "storage trend: " << to_string(result.trend) << "\n"
      << "matched: " << join(result.matched_conditions) << "\n"
      << "next-grade gaps: " << join(result.next_grade_gaps) << "\n";
  for (const auto& note : result.notes) out << "note: " << note << "\n";
}

SeriesMap series_from_json(const Json& json) {
  if (!json.is_object()) throw Error(ErrorCode::ParseError, "series", "expected object of subject -> points");
  SeriesMap series;
  for (const auto& [subject, points] : json.items()) {
    if (!points.is_array()) throw Error(ErrorCode::ParseError, "series." + subject, "expected array");
    for (std::size_t i = 0; i < points.size(); ++i) {
      FieldReader r(points[i], "series." + subject + "[" + std::to_string(i) + "]");
      series[subject].push_back({r.timestamp("t"), r.number("Q")});
      r.finish();
    }
  }
  for (auto& [subject, points] : series) {
    std::sort(points.begin(), points.end(), [](const SeriesPoint& x, const SeriesPoint& y) { return x.t < y.t; });
  }
  return series;
}

SeriesMap series_from_store(const Store& store) {
  SeriesMap series;
  for (const auto& r : store.all_results()) series[r.subject_id].push_back({r.computed_at, r.q_raw});
  for (auto& [subject, points] : series) {
    std::sort(points.begin(), points.end(), [](const SeriesPoint& x, const SeriesPoint& y) { return x.t < y.t; });
  }
  return series;
}

struct Options {
  std::string store = "aiq-store";
  std::string file;
  std::string id;
  std::string battery;
  std::string subject;
  std::string adapter;
  std::string grader;
  std::string item;
  double points = 0.0;
  double eps = 0.0;
  std::string format = "text";
  std::string csv;
  std::string series;
  std::string baseline;
  std::string bind = "127.0.0.1";
  int port = 8765;
  std::string static_dir;
  bool json = false;
  // subject add
  std::string name;
  std::string category = "ArtificialSystem";
  std::string region;
  std::string country;
  int vintage = 0;
};

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, CliEnv env) {
  SystemClock system_clock;
  Clock& clock = env.clock ? *env.clock : static_cast<Clock&>(system_clock);
  Options o;

  CLI::App app{"AI IQ assessment: batteries, sessions, scoring, grades and reports", "aiq"};
  app.require_subcommand(1);
  const auto add_store = [&o](CLI::App* cmd) {
    cmd->add_option("--store", o.store, "Store directory (AIQ_STORE overrides)")->capture_default_str();
  };

  auto* battery = app.add_subcommand("battery", "Battery files")->require_subcommand(1);
  auto* battery_validate = battery->add_subcommand("validate", "Validate a battery file");
  battery_validate->add_option("file", o.file)->required();

  auto* subject = app.add_subcommand("subject", "Subject registry")->require_subcommand(1);
  auto* subject_add = subject->add_subcommand("add", "Register a subject");
  subject_add->add_option("--id", o.id)->required();
  subject_add->add_option("--name", o.name)->required();
  subject_add->add_option("--category", o.category)
      ->check(CLI::IsMember({"Human", "ArtificialSystem"}))
      ->capture_default_str();
  subject_add->add_option("--region", o.region);
  subject_add->add_option("--country", o.country);
  subject_add->add_option("--vintage", o.vintage);
  add_store(subject_add);
  auto* subject_list = subject->add_subcommand("list", "List subjects");
  add_store(subject_list);

  auto* session = app.add_subcommand("session", "Test sessions")->require_subcommand(1);
  auto* session_start = session->add_subcommand("start", "Create a session");
  session_start->add_option("--battery", o.battery, "Battery file")->required();
  session_start->add_option("--subject", o.subject, "Subject id")->required();
  session_start->add_option("--adapter", o.adapter, "Adapter config file")->required();
  add_store(session_start);
  auto* session_run = session->add_subcommand("run", "Administer remaining items");
  session_run->add_option("id", o.id)->required();
  add_store(session_run);
  auto* session_show = session->add_subcommand("show", "Show a session");
  session_show->add_option("id", o.id)->required();
  session_show->add_flag("--json", o.json, "Print the stored session document");
  add_store(session_show);
  auto* session_abort = session->add_subcommand("abort", "Abort a session");
  session_abort->add_option("id", o.id)->required();
  add_store(session_abort);

  auto* score = app.add_subcommand("score", "Manual grading")->require_subcommand(1);
  auto* score_interactive = score->add_subcommand("interactive", "Terminal grading loop");
  score_interactive->add_option("id", o.id)->required();
  score_interactive->add_option("--grader", o.grader, "Grader id")->required();
  add_store(score_interactive);
  auto* score_set = score->add_subcommand("set", "Record one manual score");
  score_set->add_option("id", o.id)->required();
  score_set->add_option("--item", o.item)->required();
  score_set->add_option("--points", o.points)->required();
  score_set->add_option("--grader", o.grader)->required();
  add_store(score_set);

  auto* grade = app.add_subcommand("grade", "Intelligence grades")->require_subcommand(1);
  auto* grade_classify = grade->add_subcommand("classify", "Classify a capability profile");
  grade_classify->add_option("profile", o.file)->required();
  grade_classify->add_option("--eps", o.eps, "Storage trend tolerance")->check(CLI::NonNegativeNumber);
  grade_classify->add_flag("--json", o.json);

  auto* report = app.add_subcommand("report", "Reports")->require_subcommand(1);
  const auto add_format = [&o](CLI::App* cmd) {
    cmd->add_option("--format", o.format)->check(CLI::IsMember({"text", "csv", "json"}))->capture_default_str();
    cmd->add_option("--csv", o.csv, "Also write CSV to this path");
  };
  auto* report_rank = report->add_subcommand("rank", "Rank table of the latest result per subject");
  add_store(report_rank);
  add_format(report_rank);
  auto* report_trend = report->add_subcommand("trend", "Trend scenarios against a human baseline");
  report_trend->add_option("--baseline", o.baseline, "Baseline subject id")->required();
  report_trend->add_option("--series", o.series, "Series file (default: results in the store)");
  add_store(report_trend);
  add_format(report_trend);
  auto* report_results = report->add_subcommand("results", "Export every IQ result");
  add_store(report_results);
  report_results->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));

  auto* serve = app.add_subcommand("serve", "Local HTTP API (unauthenticated)");
  serve->add_option("--port", o.port, "Port (AIQ_PORT overrides)")->capture_default_str();
  serve->add_option("--bind", o.bind, "Bind address; anything but loopback exposes an unauthenticated API")
      ->capture_default_str();
  serve->add_option("--static", o.static_dir, "Directory of console assets to serve at /");
  add_store(serve);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    env.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    env.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    env.err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (battery_validate->parsed()) {
      const Battery b = read_battery_unchecked(o.file);
      const ValidationReport violations = validate_battery(b);
      if (!violations.empty()) {
        print_violations(env.err, violations);
        return kExitDomain;
      }
      env.out << "valid: " << b.id << " " << b.version << " (" << b.subtests.size() << " subtests, "
              << b.item_count() << " items)\n";
      return kExitOk;
    }
    if (subject_add->parsed()) {
      Store store(resolve_store(o.store));
      Subject s;
      s.id = o.id;
      s.display_name = o.name;
      s.category = parse_category(o.category);
      if (!o.region.empty()) s.region = o.region;
      if (!o.country.empty()) s.country = o.country;
      if (subject_add->count("--vintage") > 0) s.vintage = o.vintage;
      store.add_subject(s);
      env.out << "added: " << s.id << "\n";
      return kExitOk;
    }
    if (subject_list->parsed()) {
      Store store(resolve_store(o.store));
      for (const auto& s : store.subjects()) {
        env.out << s.id << "\t" << s.display_name << "\t" << to_string(s.category) << "\n";
      }
      return kExitOk;
    }
    if (session_start->parsed()) {
      Store store(resolve_store(o.store));
      const Battery b = load_battery(o.battery);
      const AdapterConfig cfg = adapter_config_from_json(read_json_file(o.adapter), default_timeout_from_env());
      const Session s = start_session(store, b, o.subject, cfg, clock);
      env.out << s.id << "\n";
      return kExitOk;
    }
    if (session_run->parsed()) {
      Store store(resolve_store(o.store));
      StreamOperator op(env.in, env.out);
      const Session s = run_session(store, o.id, AdapterContext{&clock, &op});
      print_session(env.out, s, store.battery(s.battery));
      return kExitOk;
    }
    if (session_show->parsed()) {
      Store store(resolve_store(o.store));
      const Session s = store.load_session(o.id);
      if (o.json) {
        env.out << canonical_dump(to_json(s));
      } else {
        print_session(env.out, s, store.battery(s.battery));
      }
      return kExitOk;
    }
    if (session_abort->parsed()) {
      Store store(resolve_store(o.store));
      const Session s = abort_session(store, o.id, clock);
      env.out << "status: " << to_string(s.status) << "\n";
      return kExitOk;
    }
    if (score_set->parsed()) {
      Store store(resolve_store(o.store));
      const Session s = record_manual_score(store, o.id, o.item, o.points, o.grader, clock);
      env.out << "status: " << to_string(s.status) << "\n";
      return kExitOk;
    }
    if (score_interactive->parsed()) {
      Store store(resolve_store(o.store));
      Session s = store.load_session(o.id);
      const Battery b = store.battery(s.battery);
      for (const TestItem* item : pending_items(s, b)) {
        const auto& rubric = std::get<HumanRubric>(item->scoring);
        env.out << "\n[" << item->id << "] " << item->prompt.content << "\n"
                << "response: " << s.responses.at(item->id).raw_response << "\n"
                << "rubric: " << rubric.rubric << "\n";
        for (;;) {
          env.out << "points (0-" << format_number(item->max_points) << ", step " << format_number(rubric.step)
                  << "; empty to skip, q to quit): " << std::flush;
          std::string line;
          if (!std::getline(env.in, line) || line == "q") {
            env.out << "\nstatus: " << to_string(s.status) << "\n";
            return kExitOk;
          }
          if (line.empty()) break;
          double points = 0.0;
          try {
            std::size_t used = 0;
            points = std::stod(line, &used);
            if (used != line.size()) throw std::invalid_argument(line);
          } catch (const std::exception&) {
            env.err << "not a number: " << line << "\n";
            continue;
          }
          try {
            s = record_manual_score(store, o.id, item->id, points, o.grader, clock);
            break;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::OutOfRange) throw;
            env.err << e.what() << "\n";
          }
        }
      }
      print_session(env.out, s, b);
      return kExitOk;
    }
    if (grade_classify->parsed()) {
      const GradeResult result = classify_grade(load_profile(o.file), o.eps);
      if (o.json) {
        env.out << canonical_dump(to_json(result));
      } else {
        print_grade(env.out, result);
      }
      return kExitOk;
    }
    if (report_rank->parsed()) {
      Store store(resolve_store(o.store));
      const RankTable table = rank_report(latest_per_subject(store.all_results()), store.subjects(), clock.now());
      if (!o.csv.empty()) export_csv(table, o.csv);
      if (o.format == "csv") {
        env.out << rank_csv(table);
      } else if (o.format == "json") {
        env.out << canonical_dump(to_json(table));
      } else {
        env.out << render_rank_text(table);
      }
      return kExitOk;
    }
    if (report_trend->parsed()) {
      Store store(resolve_store(o.store));
      const SeriesMap series = o.series.empty() ? series_from_store(store) : series_from_json(read_json_file(o.series));
      const auto assessments = trend_report(series, o.baseline);
      if (!o.csv.empty()) export_csv(assessments, o.csv);
      if (o.format == "csv") {
        env.out << trend_csv(assessments);
      } else if (o.format == "json") {
        Json out = Json::array();
        for (const auto& a : assessments) out.push_back(to_json(a));
        env.out << canonical_dump(out);
      } else {
        for (const auto& a : assessments) {
          env.out << a.subject_id << ": scenario " << to_string(a.scenario) << ", slope "
                  << format_number(quantize(a.slope)) << "/yr";
          if (a.crossing_year) env.out << ", crosses baseline at " << format_timestamp(*a.crossing_time());
          env.out << "\n";
        }
      }
      return kExitOk;
    }
    if (report_results->parsed()) {
      Store store(resolve_store(o.store));
      const auto results = store.all_results();
      if (o.format == "json") {
        Json out = Json::array();
        for (const auto& r : results) out.push_back(to_json(r));
        env.out << canonical_dump(out);
      } else {
        env.out << results_csv(results);
      }
      return kExitOk;
    }
    if (serve->parsed()) {
      Store store(resolve_store(o.store));
      std::optional<std::filesystem::path> static_dir;
      if (!o.static_dir.empty()) static_dir = o.static_dir;
      ApiServer server(store, clock, static_dir);
      const int port = server.bind(o.bind, resolve_port(o.port));
      if (o.bind != "127.0.0.1" && o.bind != "localhost" && o.bind != "::1") {
        env.err << "warning: the API is unauthenticated and now reachable on " << o.bind << "\n";
      }
      env.out << "listening on http://" << o.bind << ":" << port << "\n" << std::flush;
      server.listen();
      return kExitOk;
    }
  } catch (const Error& e) {
    env.err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    env.err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  env.err << app.help();
  return kExitUsage;
}

}  // namespace aiq
