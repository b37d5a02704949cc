#include "tunegrid/proto/gateway.hpp"

#include "tunegrid/error.hpp"

namespace tunegrid::proto {

struct WorkerGateway::Session {
  jobs::SessionId id = 0;
  std::shared_ptr<Connection> connection;
  std::thread reader;
  std::atomic<std::uint64_t> received{0};
  std::atomic<std::uint64_t> sent{0};
  std::atomic<bool> finished{false};

  bool send(const Message& m) {
    try {
      connection->send(m);
      sent.fetch_add(1);
      return true;
    } catch (const Error&) {
      return false;  // the reader observes the close and reports the disconnect
    }
  }
};

class WorkerGateway::Link final : public jobs::WorkerLink {
 public:
  Link(std::shared_ptr<Session> session, std::optional<gen::GeneratorModel> model)
      : session_(std::move(session)), model_(std::move(model)) {}

  void on_registered(jobs::TimeMs heartbeat_interval_ms) override {
    session_->send(Welcome{heartbeat_interval_ms, model_});
  }

  void on_rejected(ErrorCode code, const std::string& detail) override {
    session_->send(Err{std::string(error_code_name(code)), detail});
    session_->connection->close();
  }

  void deliver(const jobs::WorkerCommand& command) override {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, jobs::AssignCommand>) {
            session_->send(Assign{c.job_id, c.params, c.chunk_events, c.chunk_seed.value});
          } else if constexpr (std::is_same_v<T, jobs::AbortCommand>) {
            session_->send(Abort{c.job_id, c.reason});
          } else {
            session_->send(Ping{});
          }
        },
        command);
  }

  void disconnect() override { session_->connection->close(); }

 private:
  std::shared_ptr<Session> session_;
  std::optional<gen::GeneratorModel> model_;
};

WorkerGateway::WorkerGateway(jobs::ManagerLoop& loop, Options options) : loop_(loop), options_(std::move(options)) {}

WorkerGateway::~WorkerGateway() { shutdown(); }

jobs::SessionId WorkerGateway::serve(std::unique_ptr<Connection> connection) {
  auto session = std::make_shared<Session>();
  session->id = next_session_.fetch_add(1);
  session->connection = std::move(connection);
  {
    std::lock_guard lock(mu_);
    if (shut_down_) {
      session->connection->close();
      return session->id;
    }
    reap();
    sessions_.emplace(session->id, session);
    session->reader = std::thread([this, session] { read_loop(session); });
  }
  return session->id;
}

void WorkerGateway::listen(TcpListener& listener) {
  std::lock_guard lock(mu_);
  listener_ = &listener;
  accept_thread_ = std::thread([this, &listener] {
    while (auto connection = listener.accept()) serve(std::move(connection));
  });
}

void WorkerGateway::shutdown() {
  std::map<jobs::SessionId, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mu_);
    if (shut_down_) return;
    shut_down_ = true;
    if (listener_ != nullptr) listener_->close();
    sessions = sessions_;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  for (auto& [id, s] : sessions) s->connection->close();
  for (auto& [id, s] : sessions) {
    if (s->reader.joinable()) s->reader.join();
  }
}

void WorkerGateway::reap() {
  for (auto& [id, s] : sessions_) {
    if (s->finished.load() && s->reader.joinable()) s->reader.join();
  }
}

void WorkerGateway::read_loop(const std::shared_ptr<Session>& session) {
  auto post = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error&) {
      // Loop already stopped; nothing left to inform.
    }
  };
  std::optional<std::string> worker_id;
  for (;;) {
    std::optional<Message> message;
    try {
      message = session->connection->receive();
    } catch (const Error& e) {
      session->send(Err{std::string(error_code_name(e.code())), e.what()});
      if (!worker_id) {
        // Nothing but a valid HELLO may open a connection.
        session->connection->close();
      }
      post([&] { loop_.post_noop(); });
      session->received.fetch_add(1);
      continue;
    }
    if (!message) break;

    if (!worker_id) {
      if (const auto* hello = std::get_if<Hello>(&*message)) {
        worker_id = hello->worker_id;
        post([&] {
          loop_.post_register(session->id, jobs::WorkerHello{hello->worker_id, hello->team_id, hello->capability, hello->owner},
                              std::make_shared<Link>(session, options_.model));
        });
      } else {
        session->send(Err{"protocol", "first message must be HELLO"});
        session->connection->close();
        post([&] { loop_.post_noop(); });
      }
      session->received.fetch_add(1);
      continue;
    }

    std::visit(
        [&](auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Interim>) {
            post([&] { loop_.post_interim(session->id, *worker_id, m.job_id, std::move(m.chunk)); });
          } else if constexpr (std::is_same_v<T, Hello>) {
            session->send(Err{"protocol", "HELLO is only valid as the first message"});
            post([&] { loop_.post_heartbeat(session->id, *worker_id); });
          } else if constexpr (std::is_same_v<T, Bye>) {
            session->connection->close();
            post([&] { loop_.post_heartbeat(session->id, *worker_id); });
          } else {
            post([&] { loop_.post_heartbeat(session->id, *worker_id); });
          }
        },
        *message);
    session->received.fetch_add(1);
  }
  if (worker_id) {
    post([&] { loop_.post_disconnect(session->id, *worker_id); });
  } else {
    post([&] { loop_.post_noop(); });
  }
  session->finished.store(true);
}

std::shared_ptr<WorkerGateway::Session> WorkerGateway::find(jobs::SessionId id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnknownWorker, "unknown session " + std::to_string(id));
  return it->second;
}

std::uint64_t WorkerGateway::frames_received(jobs::SessionId session) const { return find(session)->received.load(); }

std::uint64_t WorkerGateway::frames_sent(jobs::SessionId session) const { return find(session)->sent.load(); }

bool WorkerGateway::session_finished(jobs::SessionId session) const { return find(session)->finished.load(); }

}  // namespace tunegrid::proto
