#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>

#include "aiq/adapters.hpp"
#include "aiq/battery.hpp"
#include "aiq/json_util.hpp"
#include "aiq/store.hpp"
#include "aiq/time.hpp"

namespace aiq::testing {

inline std::filesystem::path source_dir() { return AIQ_SOURCE_DIR; }
inline std::filesystem::path reference_battery_path() { return source_dir() / "data" / "reference-battery-v1.json"; }
inline std::filesystem::path profiles_dir() { return source_dir() / "data" / "profiles"; }
inline std::filesystem::path fixtures_dir() { return source_dir() / "data" / "fixtures"; }
inline std::string stub_path() { return AIQ_STUB_PATH; }
inline std::string cli_path() { return AIQ_CLI_PATH; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("aiq-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline Timestamp epoch_2016() { return parse_timestamp("2016-02-01T00:00:00.000Z"); }

inline AdapterConfig stub_adapter(const std::string& mode, const std::vector<std::string>& extra = {},
                                  Millis timeout = Millis{5000}) {
  AdapterConfig cfg;
  cfg.kind = AdapterKind::Subprocess;
  cfg.command = stub_path();
  cfg.args = {mode};
  cfg.args.insert(cfg.args.end(), extra.begin(), extra.end());
  cfg.timeout = timeout;
  return cfg;
}

// In-process HTTP subject on a loopback port.
class HttpStub {
 public:
  using Handler = httplib::Server::Handler;

  explicit HttpStub(Handler handler) {
    server_.Post("/answer", std::move(handler));
    server_.Get("/answer", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~HttpStub() {
    server_.stop();
    thread_.join();
  }

  // Replies with the prompt verbatim.
  static std::unique_ptr<HttpStub> echo() {
    return std::make_unique<HttpStub>([](const httplib::Request& req, httplib::Response& res) {
      const Json body = Json::parse(req.body);
      res.set_content(Json{{"response", body.at("prompt")}}.dump(), "application/json");
    });
  }

  int port() const { return port_; }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/answer"; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

// A loopback port with nothing listening on it.
inline int closed_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace aiq::testing
