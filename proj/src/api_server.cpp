#include "aiq/api_server.hpp"

#include <thread>

#include <httplib.h>

#include "aiq/grading.hpp"
#include "aiq/reporting.hpp"
#include "aiq/scoring.hpp"

namespace aiq {

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownItem:
    case ErrorCode::UnknownSubject:
    case ErrorCode::UnknownBaseline:
    case ErrorCode::FileNotFound:
      return 404;
    case ErrorCode::NotPending:
    case ErrorCode::InvalidState:
    case ErrorCode::DuplicateSubject:
      return 409;
    case ErrorCode::OutOfRange:
      return 422;
    case ErrorCode::StoreWriteError:
      return 500;
    default:
      return 400;
  }
}

ApiError to_api_error(const Error& error) {
  return {std::string(to_string(error.code())), error.what(), http_status_for(error.code())};
}

Json to_json(const ApiError& error) {
  return {{"code", error.code}, {"message", error.message}, {"http_status", error.http_status}};
}

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, const ApiError& error) { send_json(res, to_json(error), error.http_status); }

Json parse_body(const httplib::Request& req) {
  return parse_json_text(req.body, "request body");
}

Json queue_json(const Store& store, const Session& session) {
  const Battery battery = store.battery(session.battery);
  const auto subject = store.find_subject(session.subject_id);
  Json queue = Json::array();
  for (const TestItem* item : pending_items(session, battery)) {
    const auto& rubric = std::get<HumanRubric>(item->scoring);
    queue.push_back({{"session_id", session.id},
                     {"subject_display_name", subject ? subject->display_name : session.subject_id},
                     {"item_id", item->id},
                     {"prompt", {{"modality", to_string(item->prompt.modality)}, {"content", item->prompt.content}}},
                     {"response", session.responses.at(item->id).raw_response},
                     {"rubric", rubric.rubric},
                     {"max_points", number(item->max_points)},
                     {"step", number(rubric.step)}});
  }
  return queue;
}

Json status_json(const Store& store, const Session& session) {
  const Battery battery = store.battery(session.battery);
  const auto partial = partial_ability_scores(session, battery);
  Json abilities = Json::object();
  for (std::size_t k = 0; k < kAbilities.size(); ++k) {
    abilities[std::string(to_string(kAbilities[k]))] = partial[k] ? number(*partial[k]) : Json(nullptr);
  }
  Json j = {{"session_id", session.id},
            {"status", to_string(session.status)},
            {"pending", pending_items(session, battery).size()},
            {"ability_scores", std::move(abilities)},
            {"Q", nullptr},
            {"Q_text", nullptr}};
  if (session.status == SessionStatus::Complete) {
    const IQResult iq = session_iq(session, battery, session.finished_at.value_or(session.created_at));
    j["Q"] = number(iq.q());
    j["Q_text"] = iq.q_text();
  }
  return j;
}

}  // namespace

struct ApiServer::Impl {
  Store& store;
  Clock& clock;
  httplib::Server server;
  std::thread thread;
  int port = -1;

  Impl(Store& s, Clock& c) : store(s), clock(c) {}

  template <typename Handler>
  auto guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_error(res, to_api_error(e));
      } catch (const std::exception& e) {
        send_error(res, {"Internal", e.what(), 500});
      }
    };
  }

  void routes() {
    server.Get("/api/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json out = Json::array();
      for (const auto& s : store.sessions()) {
        const auto subject = store.find_subject(s.subject_id);
        out.push_back({{"id", s.id},
                       {"subject_id", s.subject_id},
                       {"subject_display_name", subject ? subject->display_name : s.subject_id},
                       {"battery", {{"id", s.battery.id}, {"version", s.battery.version}}},
                       {"status", to_string(s.status)}});
      }
      send_json(res, out);
    }));
    server.Get(R"(/api/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, to_json(store.load_session(req.matches[1])));
    }));
    server.Get(R"(/api/sessions/([^/]+)/queue)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, queue_json(store, store.load_session(req.matches[1])));
    }));
    server.Post(R"(/api/sessions/([^/]+)/scores)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!store.has_session(id)) throw Error(ErrorCode::UnknownSession, id, "no such session");
      const Json request = parse_body(req);
      FieldReader body(request, "body");
      const std::string item_id = body.string("item_id");
      const double points = body.number("points");
      const std::string grader_id = body.string("grader_id");
      body.finish();
      const Session session = record_manual_score(store, id, item_id, points, grader_id, clock);
      Json out = status_json(store, session);
      out["item_id"] = item_id;
      send_json(res, out);
    }));
    server.Get("/api/reports/rank", guarded([this](const httplib::Request&, httplib::Response& res) {
      const RankTable table = rank_report(latest_per_subject(store.all_results()), store.subjects(), clock.now());
      send_json(res, to_json(table));
    }));
    server.Get("/api/profiles", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json out = Json::array();
      std::vector<std::filesystem::path> files;
      std::error_code ec;
      for (const auto& entry : std::filesystem::directory_iterator(store.profiles_dir(), ec)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        const CapabilityProfile profile = load_profile(file);
        out.push_back({{"name", file.stem().string()},
                       {"profile", to_json(profile)},
                       {"result", to_json(classify_grade(profile))}});
      }
      send_json(res, out);
    }));
    server.Post("/api/profiles/classify", guarded([](const httplib::Request& req, httplib::Response& res) {
      double eps = 0.0;
      if (req.has_param("eps")) {
        try {
          eps = std::stod(req.get_param_value("eps"));
        } catch (const std::exception&) {
          throw Error(ErrorCode::ParseError, "eps", "not a number");
        }
      }
      const CapabilityProfile profile = profile_from_json(parse_body(req));
      Json out = to_json(classify_grade(profile, eps));
      out["subject_id"] = profile.subject_id;
      send_json(res, out);
    }));
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        send_error(res, {res.status == 404 ? "NotFound" : "HttpError", httplib::status_message(res.status),
                         res.status});
      }
    });
  }
};

ApiServer::ApiServer(Store& store, Clock& clock, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(store, clock)) {
  impl_->routes();
  if (static_dir) impl_->server.set_mount_point("/", static_dir->string());
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port < 0) {
    throw Error(ErrorCode::ConfigInvalid, host + ":" + std::to_string(port), "cannot bind");
  }
  return impl_->port;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace aiq
