#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "tunegrid/gen/generator.hpp"
#include "tunegrid/proto/transport.hpp"

namespace tunegrid::proto {

struct AgentOptions {
  std::string worker_id;
  std::string team_id;
  std::string owner;
  double capability = 10000.0;
  double delay_ms_per_1000 = 0.0;
  /// Used when the manager's WELCOME carries no model.
  std::optional<gen::GeneratorModel> model;
  std::function<void(const std::string&)> log;
};

enum class AgentExit { kBye, kDisconnected, kRejected, kStopped };

std::string_view to_string(AgentExit e);

/**
 * Worker side of the protocol.
 *
 * After the HELLO/WELCOME handshake the agent answers PING with PONG and
 * runs assignments on a compute thread: chunk i of an ASSIGN uses seed
 * chunk_seed + i, and each finished chunk goes back as an INTERIM. ABORT, or
 * a new ASSIGN, stops the running chunk within kInterruptBatch events and
 * drops its partial events; once the abort has been handled no further
 * INTERIM for that assignment is sent.
 */
class WorkerAgent {
 public:
  WorkerAgent(std::unique_ptr<Connection> connection, AgentOptions options);
  ~WorkerAgent();

  WorkerAgent(const WorkerAgent&) = delete;
  WorkerAgent& operator=(const WorkerAgent&) = delete;

  /// Runs until BYE, disconnect, rejection or stop().
  AgentExit run();

  /// Sends BYE and closes; safe from any thread.
  void stop();

  std::uint64_t chunks_sent() const { return chunks_sent_.load(); }
  std::uint64_t aborts_received() const { return aborts_received_.load(); }
  std::uint64_t assigns_received() const { return assigns_received_.load(); }
  bool welcomed() const { return welcomed_.load(); }
  std::optional<std::string> current_job() const;

 private:
  void start_compute(std::string job_id, tune::TuneParameters params, std::uint64_t chunk_events, std::uint64_t seed);
  void stop_compute();
  void log(const std::string& line) const;

  std::unique_ptr<Connection> connection_;
  AgentOptions options_;
  std::optional<gen::GeneratorModel> model_;

  mutable std::mutex send_mu_;  // orders INTERIM sends against abort handling
  std::jthread compute_;
  std::optional<std::string> current_job_;  // guarded by send_mu_

  std::atomic<bool> stopping_{false};
  std::atomic<bool> welcomed_{false};
  std::atomic<std::uint64_t> chunks_sent_{0};
  std::atomic<std::uint64_t> aborts_received_{0};
  std::atomic<std::uint64_t> assigns_received_{0};
};

}  // namespace tunegrid::proto
