#pragma once

#include <memory>

#include "tunegrid/app/config.hpp"
#include "tunegrid/jobs/manager_loop.hpp"
#include "tunegrid/proto/gateway.hpp"
#include "tunegrid/proto/transport.hpp"
#include "tunegrid/registry/registry.hpp"
#include "tunegrid/service/http_server.hpp"
#include "tunegrid/service/service.hpp"

namespace tunegrid::app {

/// Registry, manager loop, worker gateway and HTTP service wired from one config.
class ServerStack {
 public:
  /// Binds both listeners (port 0 picks a free one) and starts serving. Throws kTransport / kIo.
  explicit ServerStack(ServerConfig config);
  ~ServerStack();

  ServerStack(const ServerStack&) = delete;
  ServerStack& operator=(const ServerStack&) = delete;

  void stop();

  const ServerConfig& config() const { return config_; }
  Endpoint http_endpoint() const { return {config_.http.host, http_port_}; }
  Endpoint worker_endpoint() const { return {config_.workers.host, listener_->port()}; }

  jobs::ManagerLoop& loop() { return *loop_; }
  registry::Registry& registry() { return *registry_; }
  service::Service& service() { return *service_; }

 private:
  ServerConfig config_;
  std::unique_ptr<jobs::ManagerLoop> loop_;
  std::unique_ptr<proto::TcpListener> listener_;
  std::unique_ptr<proto::WorkerGateway> gateway_;
  std::unique_ptr<registry::Registry> registry_;
  std::unique_ptr<service::Service> service_;
  std::unique_ptr<service::HttpServer> http_;
  int http_port_ = 0;
  bool stopped_ = false;
};

}  // namespace tunegrid::app
