#include "tunegrid/proto/worker_agent.hpp"

#include "tunegrid/error.hpp"

namespace tunegrid::proto {

std::string_view to_string(AgentExit e) {
  switch (e) {
    case AgentExit::kBye: return "bye";
    case AgentExit::kDisconnected: return "disconnected";
    case AgentExit::kRejected: return "rejected";
    case AgentExit::kStopped: return "stopped";
  }
  return "?";
}

WorkerAgent::WorkerAgent(std::unique_ptr<Connection> connection, AgentOptions options)
    : connection_(std::move(connection)), options_(std::move(options)), model_(options_.model) {}

WorkerAgent::~WorkerAgent() {
  stop_compute();
  connection_->close();
}

void WorkerAgent::log(const std::string& line) const {
  if (options_.log) options_.log(line);
}

std::optional<std::string> WorkerAgent::current_job() const {
  std::lock_guard lock(send_mu_);
  return current_job_;
}

void WorkerAgent::stop() {
  if (stopping_.exchange(true)) return;
  try {
    connection_->send(Bye{});
  } catch (const Error&) {
  }
  connection_->close();
}

void WorkerAgent::stop_compute() {
  {
    std::lock_guard lock(send_mu_);
    compute_.request_stop();
    current_job_.reset();
  }
  if (compute_.joinable()) compute_.join();
}

void WorkerAgent::start_compute(std::string job_id, tune::TuneParameters params, std::uint64_t chunk_events,
                                std::uint64_t seed) {
  stop_compute();
  {
    std::lock_guard lock(send_mu_);
    current_job_ = job_id;
  }
  compute_ = std::jthread([this, job_id = std::move(job_id), params = std::move(params), chunk_events,
                           seed](std::stop_token stop) {
    gen::ChunkOptions opts;
    opts.delay_ms_per_1000 = options_.delay_ms_per_1000;
    opts.stop = stop;
    for (std::uint64_t i = 0; !stop.stop_requested(); ++i) {
      std::optional<histo::HistogramSet> chunk;
      try {
        chunk = gen::generate_chunk(*model_, params, chunk_events, gen::Seed{seed + i}, opts);
      } catch (const Error& e) {
        log(std::string("cannot run assignment: ") + e.what());
        return;
      }
      if (!chunk) return;
      std::lock_guard lock(send_mu_);
      if (stop.stop_requested()) return;
      try {
        connection_->send(Interim{job_id, std::move(*chunk)});
      } catch (const Error&) {
        return;
      }
      chunks_sent_.fetch_add(1);
    }
  });
}

AgentExit WorkerAgent::run() {
  try {
    connection_->send(Hello{options_.worker_id, options_.team_id, options_.capability, kProtocolVersion, options_.owner});
  } catch (const Error& e) {
    log(std::string("handshake failed: ") + e.what());
    return stopping_ ? AgentExit::kStopped : AgentExit::kDisconnected;
  }

  AgentExit exit = AgentExit::kDisconnected;
  for (;;) {
    std::optional<Message> message;
    try {
      message = connection_->receive();
    } catch (const Error& e) {
      log(std::string("bad frame from manager: ") + e.what());
      continue;
    }
    if (!message) break;

    if (!welcomed_) {
      if (auto* welcome = std::get_if<Welcome>(&*message)) {
        if (welcome->model) model_ = welcome->model;
        if (!model_) {
          log("manager sent no generator model and none is configured");
          exit = AgentExit::kRejected;
          break;
        }
        welcomed_ = true;
        log("WELCOME heartbeat_interval_ms=" + std::to_string(welcome->heartbeat_interval_ms));
        continue;
      }
      if (auto* err = std::get_if<Err>(&*message)) {
        log("rejected: " + err->code + ": " + err->detail);
        exit = AgentExit::kRejected;
        break;
      }
    }

    if (auto* assign = std::get_if<Assign>(&*message)) {
      assigns_received_.fetch_add(1);
      log("ASSIGN " + assign->job_id + " chunk_events=" + std::to_string(assign->chunk_events));
      start_compute(assign->job_id, assign->params, assign->chunk_events, assign->chunk_seed);
    } else if (auto* abort = std::get_if<Abort>(&*message)) {
      aborts_received_.fetch_add(1);
      log("ABORT " + abort->job_id + " reason=" + std::string(jobs::to_string(abort->reason)));
      if (current_job() == abort->job_id) stop_compute();
    } else if (std::holds_alternative<Ping>(*message)) {
      try {
        connection_->send(Pong{});
      } catch (const Error&) {
        break;
      }
    } else if (std::holds_alternative<Bye>(*message)) {
      exit = AgentExit::kBye;
      break;
    } else if (auto* err = std::get_if<Err>(&*message)) {
      log("manager error: " + err->code + ": " + err->detail);
    }
  }
  stop_compute();
  connection_->close();
  if (stopping_) return AgentExit::kStopped;
  return exit;
}

}  // namespace tunegrid::proto
