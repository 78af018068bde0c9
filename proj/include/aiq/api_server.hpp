#pragma once

// Local JSON API over a store, used by the grader console.
//
//   GET  /api/sessions
//   GET  /api/sessions/{id}
//   GET  /api/sessions/{id}/queue
//   POST /api/sessions/{id}/scores      {item_id, points, grader_id}
//   GET  /api/reports/rank
//   GET  /api/profiles
//   POST /api/profiles/classify[?eps=E] capability profile
//
// Errors are {"code", "message", "http_status"}. There is no
// authentication; bind to loopback unless the network is trusted.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "aiq/error.hpp"
#include "aiq/json_util.hpp"
#include "aiq/store.hpp"
#include "aiq/time.hpp"

namespace aiq {

struct ApiError {
  std::string code;
  std::string message;
  int http_status = 500;
};

int http_status_for(ErrorCode code);
ApiError to_api_error(const Error& error);
Json to_json(const ApiError& error);

class ApiServer {
 public:
  ApiServer(Store& store, Clock& clock, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  // listen() on a background thread; returns once the server is accepting.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace aiq
