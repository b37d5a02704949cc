#include "tunegrid/jobs/manager_loop.hpp"

#include <chrono>

namespace tunegrid::jobs {
namespace {

TimeMs steady_now() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

ManagerLoop::ManagerLoop(JobManager manager, Clock clock, bool timer)
    : manager_(std::move(manager)),
      clock_(clock ? std::move(clock) : Clock(steady_now)),
      heartbeat_ms_(manager_.config().heartbeat_interval_ms),
      timer_(timer),
      snapshot_(std::make_shared<const Snapshot>(manager_.snapshot())) {
  thread_ = std::thread([this] { run(); });
}

ManagerLoop::~ManagerLoop() { stop(); }

void ManagerLoop::stop() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && !thread_.joinable()) return;
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  for (auto& [id, entry] : links_) entry.link->disconnect();
  links_.clear();
}

void ManagerLoop::post(Command c) {
  {
    std::lock_guard lock(mu_);
    if (stopping_) throw Error(ErrorCode::kInvalidState, "manager loop is stopped");
    queue_.push_back(std::move(c));
  }
  cv_.notify_all();
}

void ManagerLoop::run() {
  // Heartbeat bookkeeping runs a few times per interval.
  const auto tick_every = std::chrono::milliseconds(std::max<TimeMs>(1, heartbeat_ms_ / 4));
  auto next_tick = std::chrono::steady_clock::now() + tick_every;
  for (;;) {
    Command command;
    bool tick = false;
    {
      std::unique_lock lock(mu_);
      auto ready = [&] { return stopping_ || !queue_.empty(); };
      if (timer_) {
        cv_.wait_until(lock, next_tick, ready);
      } else {
        cv_.wait(lock, ready);
      }
      if (stopping_ && queue_.empty()) return;
      if (!queue_.empty()) {
        command = std::move(queue_.front());
        queue_.pop_front();
      } else {
        tick = true;
      }
    }
    if (timer_ && (tick || std::chrono::steady_clock::now() >= next_tick)) {
      manager_.tick(clock_());
      next_tick = std::chrono::steady_clock::now() + tick_every;
      flush();
    }
    if (command) {
      command(manager_);
      flush();
      processed_.fetch_add(1);
    }
  }
}

void ManagerLoop::flush() {
  auto effects = manager_.take_effects();
  for (const auto& id : effects.dropped_workers) drop(id);
  for (const auto& command : effects.commands) {
    auto it = links_.find(target_worker(command));
    if (it != links_.end()) it->second.link->deliver(command);
  }
  for (const auto& event : effects.events) hub_.publish(event);
  auto snap = std::make_shared<Snapshot>(manager_.snapshot());
  {
    std::lock_guard lock(mu_);
    snap->version = ++snapshot_version_;
    snapshot_ = std::move(snap);
  }
  for (auto& reply : std::exchange(replies_, {})) reply();
}

void ManagerLoop::drop(const std::string& worker_id) {
  auto it = links_.find(worker_id);
  if (it == links_.end()) return;
  auto link = std::move(it->second.link);
  links_.erase(it);
  link->disconnect();
}

bool ManagerLoop::owns(SessionId session, const std::string& worker_id) const {
  auto it = links_.find(worker_id);
  return it != links_.end() && it->second.session == session;
}

SubmitResult ManagerLoop::submit(const std::string& team_id, const std::string& player_id,
                                 const tune::TuneParameters& params) {
  auto promise = std::make_shared<std::promise<SubmitResult>>();
  auto future = promise->get_future();
  post([=, this](JobManager& m) {
    try {
      auto r = m.submit(team_id, player_id, params, clock_());
      replies_.push_back([promise, r = std::move(r)]() mutable { promise->set_value(std::move(r)); });
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  });
  return future.get();
}

void ManagerLoop::cancel(const std::string& job_id) {
  auto promise = std::make_shared<std::promise<void>>();
  auto future = promise->get_future();
  post([=, this](JobManager& m) {
    try {
      m.cancel(job_id, clock_());
      replies_.push_back([promise] { promise->set_value(); });
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  });
  future.get();
}

void ManagerLoop::add_team(const std::string& team_id) {
  auto promise = std::make_shared<std::promise<void>>();
  auto future = promise->get_future();
  post([=](JobManager& m) {
    try {
      m.add_team(team_id);
      promise->set_value();
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  });
  future.get();
}

void ManagerLoop::post_register(SessionId session, WorkerHello hello, std::shared_ptr<WorkerLink> link) {
  post([=, this, hello = std::move(hello), link = std::move(link)](JobManager& m) {
    try {
      m.register_worker(hello.worker_id, hello.team_id, hello.capability, hello.owner, clock_());
    } catch (const Error& e) {
      link->on_rejected(e.code(), e.what());
      return;
    }
    links_[hello.worker_id] = LinkEntry{session, link};
    link->on_registered(heartbeat_ms_);
  });
}

void ManagerLoop::post_interim(SessionId session, std::string worker_id, std::string job_id,
                               histo::HistogramSet chunk) {
  post([=, this, chunk = std::move(chunk)](JobManager& m) {
    if (!owns(session, worker_id)) return;
    try {
      m.on_interim(worker_id, job_id, chunk, clock_());
    } catch (const Error&) {
      // Malformed or mismatched chunks are dropped; the worker stays connected.
    }
  });
}

void ManagerLoop::post_heartbeat(SessionId session, std::string worker_id) {
  post([=, this](JobManager& m) {
    if (owns(session, worker_id)) m.on_heartbeat(worker_id, clock_());
  });
}

void ManagerLoop::post_disconnect(SessionId session, std::string worker_id) {
  post([=, this](JobManager& m) {
    if (!owns(session, worker_id)) return;
    links_.erase(worker_id);
    m.on_disconnect(worker_id);
  });
}

void ManagerLoop::post_tick() {
  post([this](JobManager& m) { m.tick(clock_()); });
}

void ManagerLoop::post_noop() {
  post([](JobManager&) {});
}

void ManagerLoop::sync() {
  auto promise = std::make_shared<std::promise<void>>();
  auto future = promise->get_future();
  post([promise](JobManager&) { promise->set_value(); });
  future.get();
}

std::shared_ptr<const Snapshot> ManagerLoop::snapshot() const {
  std::lock_guard lock(mu_);
  return snapshot_;
}

}  // namespace tunegrid::jobs
