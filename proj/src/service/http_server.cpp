#include "tunegrid/service/http_server.hpp"

#include <httplib.h>

#include <atomic>
#include <thread>

#include "tunegrid/service/api_json.hpp"

namespace tunegrid::service {
namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

}  // namespace

std::string sse_frame(const jobs::ProgressEvent& e) {
  return "event: " + std::string(jobs::to_string(e.kind)) + "\ndata: " + json(e).dump() + "\n\n";
}

struct HttpServer::Impl {
  Service& service;
  HttpOptions options;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  Impl(Service& s, HttpOptions o) : service(s), options(std::move(o)) {}

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        reply(res, Service::http_status(e.code()), Service::error_body(e));
      } catch (const std::exception& e) {
        reply(res, 500, Service::error_body(Error(ErrorCode::kIo, e.what())));
      }
    };
  }

  template <typename Fn>
  void get(const std::string& pattern, Fn fn) {
    server.Get(pattern, guarded([fn](const httplib::Request& req, httplib::Response& res) { reply(res, 200, fn(req)); }));
  }

  template <typename Fn>
  void post(const std::string& pattern, int status, Fn fn) {
    server.Post(pattern, guarded([fn, status](const httplib::Request& req, httplib::Response& res) {
                  reply(res, status, fn(req, parse_body(req)));
                }));
  }

  void stream(const httplib::Request& req, httplib::Response& res) {
    auto sub = service.stream(req.matches[1], req.get_param_value("from") == "start");
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, sub](std::size_t, httplib::DataSink& sink) {
      const auto poll = std::min(options.keepalive, std::chrono::milliseconds(200));
      auto idle = std::chrono::milliseconds(0);
      while (!stopping) {
        if (auto e = sub->next(poll)) {
          const auto frame = sse_frame(*e);
          if (!sink.write(frame.data(), frame.size())) return false;
          idle = {};
          continue;
        }
        if (sub->finished()) {
          sink.done();
          return true;
        }
        idle += poll;
        if (idle >= options.keepalive) {
          static const std::string ping = ": keepalive\n\n";
          if (!sink.write(ping.data(), ping.size())) return false;
          idle = {};
        }
      }
      return false;
    });
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    get("/api/apps", [this](const auto&) { return service.list_apps(); });
    post("/api/apps", 201, [this](const auto&, const json& b) { return service.register_app(b); });
    get("/api/groups", [this](const auto&) { return service.list_groups(); });
    post("/api/groups", 201, [this](const auto&, const json& b) { return service.create_group(b); });
    post(R"(/api/groups/([^/]+)/join)", 200,
         [this](const httplib::Request& r, const json& b) { return service.join_group(r.matches[1], b); });
    post(R"(/api/groups/([^/]+)/attach)", 200,
         [this](const httplib::Request& r, const json& b) { return service.attach_app(r.matches[1], b); });
    post(R"(/api/groups/([^/]+)/launch)", 201,
         [this](const httplib::Request& r, const json& b) { return service.launch_worker(r.matches[1], b); });

    get("/api/jobs", [this](const auto&) { return service.list_jobs(); });
    post("/api/jobs", 202, [this](const auto&, const json& b) { return service.submit(b); });
    get(R"(/api/jobs/([^/]+))", [this](const httplib::Request& r) { return service.job(r.matches[1]); });
    post(R"(/api/jobs/([^/]+)/cancel)", 200,
         [this](const httplib::Request& r, const json&) { return service.cancel(r.matches[1]); });
    server.Get(R"(/api/jobs/([^/]+)/stream)",
               guarded([this](const httplib::Request& req, httplib::Response& res) { stream(req, res); }));

    get("/api/status", [this](const auto&) { return service.status(); });
    get("/api/leaderboard", [this](const auto&) { return service.leaderboard(); });
    get("/api/space", [this](const auto&) { return service.space(); });

    if (!options.static_dir.empty()) server.set_mount_point("/", options.static_dir.string());
    const std::size_t threads = options.threads;
    server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  }
};

HttpServer::HttpServer(Service& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error(ErrorCode::kTransport, "cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tunegrid::service
