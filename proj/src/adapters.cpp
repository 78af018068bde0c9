#include "aiq/adapters.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include "aiq/error.hpp"

extern char** environ;

namespace aiq {

std::string_view to_string(AdapterKind kind) {
  switch (kind) {
    case AdapterKind::HttpJson: return "HttpJson";
    case AdapterKind::Subprocess: return "Subprocess";
    case AdapterKind::ManualTranscript: return "ManualTranscript";
  }
  return "ManualTranscript";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Answered: return "Answered";
    case Outcome::Timeout: return "Timeout";
    case Outcome::TransportError: return "TransportError";
    case Outcome::Refused: return "Refused";
  }
  return "Answered";
}

Outcome parse_outcome(std::string_view text) {
  for (Outcome o : {Outcome::Answered, Outcome::Timeout, Outcome::TransportError, Outcome::Refused}) {
    if (to_string(o) == text) return o;
  }
  throw Error(ErrorCode::ParseError, "outcome", "unknown outcome '" + std::string(text) + "'");
}

namespace {

struct HttpEndpoint {
  std::string host;
  int port = 80;
  std::string path = "/";
};

std::optional<HttpEndpoint> parse_endpoint(const std::string& uri) {
  constexpr std::string_view scheme = "http://";
  if (uri.rfind(scheme, 0) != 0) return std::nullopt;
  std::string rest = uri.substr(scheme.size());
  HttpEndpoint ep;
  const auto slash = rest.find('/');
  if (slash != std::string::npos) {
    ep.path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  const auto colon = rest.rfind(':');
  if (colon != std::string::npos) {
    const std::string port = rest.substr(colon + 1);
    if (port.empty() || port.find_first_not_of("0123456789") != std::string::npos || port.size() > 5) {
      return std::nullopt;
    }
    ep.port = std::stoi(port);
    if (ep.port <= 0 || ep.port > 65535) return std::nullopt;
    rest = rest.substr(0, colon);
  }
  if (rest.empty()) return std::nullopt;
  ep.host = rest;
  return ep;
}

}  // namespace

void validate_adapter_config(const AdapterConfig& cfg) {
  if (cfg.timeout <= Millis{0}) throw Error(ErrorCode::ConfigInvalid, "timeout_ms", "must be > 0");
  if (cfg.inter_item_delay < Millis{0}) throw Error(ErrorCode::ConfigInvalid, "inter_item_delay_ms", "must be >= 0");
  const bool http = cfg.kind == AdapterKind::HttpJson;
  const bool proc = cfg.kind == AdapterKind::Subprocess;
  if (http != !cfg.endpoint.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "endpoint", http ? "required for HttpJson" : "only valid for HttpJson");
  }
  if (!http && !cfg.headers.empty()) throw Error(ErrorCode::ConfigInvalid, "headers", "only valid for HttpJson");
  if (proc != !cfg.command.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "command", proc ? "required for Subprocess" : "only valid for Subprocess");
  }
  if (!proc && (!cfg.args.empty() || !cfg.env.empty())) {
    throw Error(ErrorCode::ConfigInvalid, "args/env", "only valid for Subprocess");
  }
  if (http && !parse_endpoint(cfg.endpoint)) {
    throw Error(ErrorCode::ConfigInvalid, "endpoint", "expected http://host[:port][/path], got '" + cfg.endpoint + "'");
  }
}

Millis default_timeout_from_env() {
  if (const char* raw = std::getenv("AIQ_HTTP_TIMEOUT_MS")) {
    char* end = nullptr;
    const long long value = std::strtoll(raw, &end, 10);
    if (end != raw && *end == '\0' && value > 0) return Millis{value};
  }
  return kDefaultTimeout;
}

AdapterConfig adapter_config_from_json(const Json& json, Millis default_timeout) {
  AdapterConfig cfg;
  try {
    FieldReader r(json, "adapter");
    const std::string kind = r.string("kind");
    if (kind == "HttpJson") {
      cfg.kind = AdapterKind::HttpJson;
      cfg.endpoint = r.string("endpoint");
      if (r.has("headers")) cfg.headers = r.string_map("headers");
    } else if (kind == "Subprocess") {
      cfg.kind = AdapterKind::Subprocess;
      cfg.command = r.string("command");
      if (r.has("args")) cfg.args = r.string_list("args");
      if (r.has("env")) cfg.env = r.string_map("env");
    } else if (kind == "ManualTranscript") {
      cfg.kind = AdapterKind::ManualTranscript;
    } else {
      throw Error(ErrorCode::ConfigInvalid, "kind", "unknown adapter kind '" + kind + "'");
    }
    cfg.timeout = r.has("timeout_ms") ? Millis{r.integer("timeout_ms")} : default_timeout;
    if (r.has("inter_item_delay_ms")) cfg.inter_item_delay = Millis{r.integer("inter_item_delay_ms")};
    r.finish();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, e.field(), e.detail());
  }
  validate_adapter_config(cfg);
  return cfg;
}

Json to_json(const AdapterConfig& cfg) {
  Json j = {{"kind", to_string(cfg.kind)}, {"timeout_ms", cfg.timeout.count()}};
  if (cfg.inter_item_delay.count() != 0) j["inter_item_delay_ms"] = cfg.inter_item_delay.count();
  switch (cfg.kind) {
    case AdapterKind::HttpJson:
      j["endpoint"] = cfg.endpoint;
      j["headers"] = cfg.headers;
      break;
    case AdapterKind::Subprocess:
      j["command"] = cfg.command;
      j["args"] = cfg.args;
      j["env"] = cfg.env;
      break;
    case AdapterKind::ManualTranscript:
      break;
  }
  return j;
}

Json to_json(const ResponseRecord& record) {
  Json j = {{"item_id", record.item_id},
            {"raw_response", record.raw_response},
            {"latency_ms", record.latency.count()},
            {"outcome", to_string(record.outcome)},
            {"received_at", format_timestamp(record.received_at)}};
  if (!record.detail.empty()) j["detail"] = record.detail;
  return j;
}

ResponseRecord response_from_json(const Json& json, const std::string& context) {
  FieldReader r(json, context);
  ResponseRecord rec;
  rec.item_id = r.string("item_id");
  rec.raw_response = r.string("raw_response");
  rec.latency = Millis{r.integer("latency_ms")};
  rec.outcome = parse_outcome(r.string("outcome"));
  rec.detail = r.optional_string("detail").value_or("");
  rec.received_at = r.timestamp("received_at");
  r.finish();
  return rec;
}

StreamOperator::StreamOperator(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

std::optional<std::string> StreamOperator::relay(const TestItem& item) {
  out_ << "[" << item.id << "] (" << to_string(item.prompt.modality) << ") " << item.prompt.content << "\n> "
       << std::flush;
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line == "!refused") return std::nullopt;
  return line;
}

namespace {

using SteadyClock = std::chrono::steady_clock;

struct Attempt {
  Outcome outcome;
  std::string response;
  std::string detail;
};

Millis elapsed_since(SteadyClock::time_point start) {
  return std::chrono::duration_cast<Millis>(SteadyClock::now() - start);
}

Attempt http_attempt(const AdapterConfig& cfg, const HttpEndpoint& ep, const TestItem& item, Millis budget) {
  httplib::Client client(ep.host, ep.port);
  client.set_connection_timeout(budget);
  client.set_read_timeout(budget);
  client.set_write_timeout(budget);
  httplib::Headers headers;
  for (const auto& [k, v] : cfg.headers) headers.emplace(k, v);
  const Json body = {{"item_id", item.id},
                     {"prompt", item.prompt.content},
                     {"modality", to_string(item.prompt.modality)}};
  const auto start = SteadyClock::now();
  auto res = client.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) {
    const httplib::Error err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                            elapsed_since(start) + Millis{5} >= budget);
    return {timed_out ? Outcome::Timeout : Outcome::TransportError, "", httplib::to_string(err)};
  }
  if (res->status < 200 || res->status >= 300) {
    return {Outcome::TransportError, "", "HTTP " + std::to_string(res->status)};
  }
  try {
    const Json reply = Json::parse(res->body);
    if (reply.is_object() && reply.contains("refused") && reply["refused"] == true) {
      return {Outcome::Refused, "", ""};
    }
    if (!reply.is_object() || !reply.contains("response") || !reply["response"].is_string()) {
      return {Outcome::TransportError, "", "reply lacks a string \"response\""};
    }
    return {Outcome::Answered, reply["response"].get<std::string>(), ""};
  } catch (const Json::exception&) {
    return {Outcome::TransportError, "", "reply is not JSON"};
  }
}

Attempt administer_http(const AdapterConfig& cfg, const TestItem& item, SteadyClock::time_point start) {
  const HttpEndpoint ep = *parse_endpoint(cfg.endpoint);
  Attempt result = http_attempt(cfg, ep, item, cfg.timeout);
  if (result.outcome == Outcome::TransportError) {
    const Millis remaining = cfg.timeout - elapsed_since(start);
    if (remaining > Millis{0}) {
      result = http_attempt(cfg, ep, item, remaining);
      if (result.outcome == Outcome::TransportError) result.detail += " (after retry)";
    }
  }
  return result;
}

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

class ChildProcess {
 public:
  ChildProcess() = default;
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ~ChildProcess() { terminate(); }

  // Empty string on success, otherwise why the launch failed.
  std::string launch(const AdapterConfig& cfg) {
    ignore_sigpipe();
    std::vector<std::string> argv_storage{cfg.command};
    argv_storage.insert(argv_storage.end(), cfg.args.begin(), cfg.args.end());
    std::vector<char*> argv;
    for (auto& s : argv_storage) argv.push_back(s.data());
    argv.push_back(nullptr);

    std::vector<std::string> env_storage;
    for (char** e = environ; e && *e; ++e) {
      std::string entry(*e);
      const std::string key = entry.substr(0, entry.find('='));
      if (!cfg.env.contains(key)) env_storage.push_back(std::move(entry));
    }
    for (const auto& [k, v] : cfg.env) env_storage.push_back(k + "=" + v);
    std::vector<char*> envp;
    for (auto& s : env_storage) envp.push_back(s.data());
    envp.push_back(nullptr);

    int to_child[2], from_child[2], exec_err[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) return std::strerror(errno);
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      close_pair(to_child);
      return std::strerror(errno);
    }
    if (::pipe2(exec_err, O_CLOEXEC) != 0) {
      close_pair(to_child);
      close_pair(from_child);
      return std::strerror(errno);
    }

    pid_ = ::fork();
    if (pid_ < 0) {
      const std::string why = std::strerror(errno);
      close_pair(to_child);
      close_pair(from_child);
      close_pair(exec_err);
      return why;
    }
    if (pid_ == 0) {
      ::setpgid(0, 0);
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::execvpe(argv[0], argv.data(), envp.data());
      const int code = errno;
      [[maybe_unused]] auto n = ::write(exec_err[1], &code, sizeof code);
      ::_exit(127);
    }
    ::setpgid(pid_, pid_);
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::close(exec_err[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];

    int code = 0;
    ssize_t n;
    do {
      n = ::read(exec_err[0], &code, sizeof code);
    } while (n < 0 && errno == EINTR);
    ::close(exec_err[0]);
    if (n == static_cast<ssize_t>(sizeof code)) {
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
      return "cannot execute '" + cfg.command + "': " + std::strerror(code);
    }
    return {};
  }

  bool write_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(in_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  enum class ReadStatus { Line, Eof, Timeout };

  ReadStatus read_line(SteadyClock::time_point deadline, std::string& line) {
    std::string buffer;
    for (;;) {
      const auto pos = buffer.find('\n');
      if (pos != std::string::npos) {
        line = buffer.substr(0, pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return ReadStatus::Line;
      }
      const auto remaining = std::chrono::duration_cast<Millis>(deadline - SteadyClock::now());
      if (remaining <= Millis{0}) return ReadStatus::Timeout;
      pollfd pfd{out_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc <= 0) return rc == 0 ? ReadStatus::Timeout : ReadStatus::Eof;
      char chunk[4096];
      const ssize_t n = ::read(out_fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        line = buffer;
        return ReadStatus::Eof;
      }
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string exit_description() {
    if (pid_ <= 0) return "process not running";
    int status = 0;
    if (::waitpid(pid_, &status, 0) == pid_) {
      pid_ = -1;
      if (WIFEXITED(status)) return "exited with status " + std::to_string(WEXITSTATUS(status));
      if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
    }
    return "exited";
  }

  void terminate() {
    if (in_fd_ >= 0) ::close(in_fd_);
    if (out_fd_ >= 0) ::close(out_fd_);
    in_fd_ = out_fd_ = -1;
    if (pid_ > 0) {
      ::kill(-pid_, SIGKILL);
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

 private:
  static void close_pair(int fds[2]) {
    ::close(fds[0]);
    ::close(fds[1]);
  }

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
};

std::string escape_line(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\r') {
      out += "\\r";
    } else {
      out += c;
    }
  }
  return out;
}

Attempt administer_subprocess(const AdapterConfig& cfg, const TestItem& item, SteadyClock::time_point start) {
  ChildProcess child;
  if (std::string why = child.launch(cfg); !why.empty()) return {Outcome::TransportError, "", why};
  child.write_line(escape_line(item.prompt.content));
  std::string line;
  switch (child.read_line(start + cfg.timeout, line)) {
    case ChildProcess::ReadStatus::Line:
      if (line.empty()) return {Outcome::Refused, "", ""};
      return {Outcome::Answered, line, ""};
    case ChildProcess::ReadStatus::Timeout:
      return {Outcome::Timeout, "", ""};
    case ChildProcess::ReadStatus::Eof:
      return {Outcome::TransportError, "", "no reply line; " + child.exit_description()};
  }
  return {Outcome::TransportError, "", "unreachable"};
}

}  // namespace

ResponseRecord administer_item(const AdapterConfig& cfg, const TestItem& item, const AdapterContext& ctx) {
  validate_adapter_config(cfg);
  SystemClock system_clock;
  Clock& clock = ctx.clock ? *ctx.clock : static_cast<Clock&>(system_clock);

  const auto start = SteadyClock::now();
  Attempt attempt{Outcome::TransportError, "", ""};
  try {
    switch (cfg.kind) {
      case AdapterKind::HttpJson:
        attempt = administer_http(cfg, item, start);
        break;
      case AdapterKind::Subprocess:
        attempt = administer_subprocess(cfg, item, start);
        break;
      case AdapterKind::ManualTranscript:
        if (ctx.op == nullptr) {
          attempt = {Outcome::TransportError, "", "no operator attached"};
        } else if (auto answer = ctx.op->relay(item)) {
          attempt = {Outcome::Answered, *answer, ""};
        } else {
          attempt = {Outcome::Refused, "", ""};
        }
        break;
    }
  } catch (const std::exception& e) {
    attempt = {Outcome::TransportError, "", e.what()};
  }

  ResponseRecord record;
  record.item_id = item.id;
  record.latency = elapsed_since(start);
  record.outcome = attempt.outcome;
  record.detail = attempt.detail;
  // Operator-relayed answers are not subject to the subject timeout.
  if (record.outcome == Outcome::Answered && cfg.kind != AdapterKind::ManualTranscript &&
      record.latency > cfg.timeout) {
    record.outcome = Outcome::Timeout;
  }
  if (record.outcome == Outcome::Answered) record.raw_response = std::move(attempt.response);
  record.received_at = clock.now();
  return record;
}

HealthReport probe_subject(const AdapterConfig& cfg) {
  validate_adapter_config(cfg);
  const auto start = SteadyClock::now();
  HealthReport report;
  switch (cfg.kind) {
    case AdapterKind::HttpJson: {
      const HttpEndpoint ep = *parse_endpoint(cfg.endpoint);
      httplib::Client client(ep.host, ep.port);
      client.set_connection_timeout(cfg.timeout);
      client.set_read_timeout(cfg.timeout);
      auto res = client.Get(ep.path);
      report.reachable = static_cast<bool>(res);
      report.detail = res ? "HTTP " + std::to_string(res->status) : "TransportError: " + httplib::to_string(res.error());
      break;
    }
    case AdapterKind::Subprocess: {
      ChildProcess child;
      const std::string why = child.launch(cfg);
      report.reachable = why.empty();
      report.detail = why.empty() ? "spawned" : "TransportError: " + why;
      break;
    }
    case AdapterKind::ManualTranscript:
      report.reachable = true;
      report.detail = "operator relay";
      break;
  }
  report.round_trip = elapsed_since(start);
  return report;
}

}  // namespace aiq
