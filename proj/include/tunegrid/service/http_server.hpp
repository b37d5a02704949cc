#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>

#include "tunegrid/service/service.hpp"

namespace tunegrid::service {

struct HttpOptions {
  std::string cors_origin = "*";
  /// Static files served at "/", e.g. the web UI build. Empty disables.
  std::filesystem::path static_dir;
  /// Comment line sent on idle progress streams.
  std::chrono::milliseconds keepalive{15000};
  std::size_t threads = 16;
};

/**
 * HTTP front end for a Service.
 *
 *   GET  /api/apps                     POST /api/apps
 *   GET  /api/groups                   POST /api/groups
 *   POST /api/groups/{id}/join         POST /api/groups/{id}/attach
 *   POST /api/groups/{id}/launch
 *   GET  /api/jobs                     POST /api/jobs            (202)
 *   GET  /api/jobs/{id}                POST /api/jobs/{id}/cancel
 *   GET  /api/jobs/{id}/stream         text/event-stream; ?from=start replays all events
 *   GET  /api/status   GET /api/leaderboard   GET /api/space
 */
class HttpServer {
 public:
  HttpServer(Service& service, HttpOptions options = {});
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws kTransport.
  int bind(const std::string& host, int port);
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One server-sent event: "event: <kind>\ndata: <json>\n\n".
std::string sse_frame(const jobs::ProgressEvent& e);

}  // namespace tunegrid::service
