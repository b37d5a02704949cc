#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "tunegrid/jobs/manager_loop.hpp"
#include "tunegrid/proto/transport.hpp"

namespace tunegrid::proto {

/**
 * Manager side of the worker protocol.
 *
 * One reader thread per connection enforces the handshake (the first message
 * must be HELLO, and HELLO is valid only once) and forwards every decoded
 * message onto the ManagerLoop command queue. Outbound traffic (WELCOME,
 * ASSIGN, ABORT, PING, ERR) is written by the loop thread through a
 * per-session link.
 */
class WorkerGateway {
 public:
  struct Options {
    /// Sent in WELCOME so workers can build their payload generator.
    std::optional<gen::GeneratorModel> model;
  };

  WorkerGateway(jobs::ManagerLoop& loop, Options options);
  ~WorkerGateway();

  WorkerGateway(const WorkerGateway&) = delete;
  WorkerGateway& operator=(const WorkerGateway&) = delete;

  /// Takes ownership of a fresh connection and starts its reader.
  jobs::SessionId serve(std::unique_ptr<Connection> connection);

  /// Accepts TCP connections on a background thread until shutdown().
  void listen(TcpListener& listener);

  /// Closes every connection and joins all threads.
  void shutdown();

  // Per-session traffic counters, used by tests to step connections deterministically.
  std::uint64_t frames_received(jobs::SessionId session) const;
  std::uint64_t frames_sent(jobs::SessionId session) const;
  /// True once the reader has exited and posted its disconnect.
  bool session_finished(jobs::SessionId session) const;

 private:
  struct Session;
  class Link;

  void read_loop(const std::shared_ptr<Session>& session);
  std::shared_ptr<Session> find(jobs::SessionId id) const;
  void reap();

  jobs::ManagerLoop& loop_;
  Options options_;
  mutable std::mutex mu_;
  std::map<jobs::SessionId, std::shared_ptr<Session>> sessions_;
  std::atomic<jobs::SessionId> next_session_{1};
  TcpListener* listener_ = nullptr;
  std::thread accept_thread_;
  bool shut_down_ = false;
};

}  // namespace tunegrid::proto
