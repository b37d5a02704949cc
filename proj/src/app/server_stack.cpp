#include "tunegrid/app/server_stack.hpp"

namespace tunegrid::app {

ServerStack::ServerStack(ServerConfig config) : config_(std::move(config)) {
  loop_ = std::make_unique<jobs::ManagerLoop>(jobs::JobManager(config_.model, config_.truth, config_.jobs));
  for (const auto& team : config_.teams) loop_->add_team(team);

  listener_ = std::make_unique<proto::TcpListener>(config_.workers.host, static_cast<std::uint16_t>(config_.workers.port));
  gateway_ = std::make_unique<proto::WorkerGateway>(*loop_, proto::WorkerGateway::Options{config_.model});
  gateway_->listen(*listener_);

  registry::RegistryOptions options;
  options.manager_endpoint =
      config_.advertised_endpoint.empty() ? worker_endpoint().str() : config_.advertised_endpoint;
  options.store = config_.registry_store;
  registry_ = std::make_unique<registry::Registry>(options);

  service_ = std::make_unique<service::Service>(*loop_, *registry_, config_.model,
                                                gen::expected_reference(config_.model, config_.truth));
  service_->sync_teams();

  service::HttpOptions http_options;
  http_options.static_dir = config_.static_dir;
  http_ = std::make_unique<service::HttpServer>(*service_, http_options);
  http_port_ = http_->bind(config_.http.host, config_.http.port);
  http_->start();
}

ServerStack::~ServerStack() { stop(); }

void ServerStack::stop() {
  if (stopped_) return;
  stopped_ = true;
  http_->stop();
  gateway_->shutdown();
  loop_->stop();
}

}  // namespace tunegrid::app
