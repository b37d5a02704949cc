#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "tunegrid/error.hpp"
#include "tunegrid/jobs/job_manager.hpp"
#include "tunegrid/jobs/progress_hub.hpp"

namespace tunegrid::jobs {

/// Manager-side endpoint of one connected worker. Called on the loop thread only.
class WorkerLink {
 public:
  virtual ~WorkerLink() = default;
  virtual void on_registered(TimeMs heartbeat_interval_ms) = 0;
  virtual void on_rejected(ErrorCode code, const std::string& detail) = 0;
  virtual void deliver(const WorkerCommand& command) = 0;
  /// Manager-initiated close, e.g. after a heartbeat timeout.
  virtual void disconnect() = 0;
};

using SessionId = std::uint64_t;

struct WorkerHello {
  std::string worker_id;
  std::string team_id;
  double capability = 0.0;
  std::string owner;
};

/**
 * Single-writer command loop around a JobManager.
 *
 * Every external event is a command on one serialized queue. After each
 * command the loop routes worker commands to their links, publishes
 * progress events to the hub, and swaps in a fresh read-only Snapshot.
 * Worker-facing posts are tagged with a connection session so events from
 * a superseded connection cannot touch a newer registration of the same id.
 */
class ManagerLoop {
 public:
  using Clock = std::function<TimeMs()>;

  /// With `timer` off, heartbeat bookkeeping runs only through post_tick().
  explicit ManagerLoop(JobManager manager, Clock clock = {}, bool timer = true);
  ~ManagerLoop();

  ManagerLoop(const ManagerLoop&) = delete;
  ManagerLoop& operator=(const ManagerLoop&) = delete;

  void stop();

  // Player-facing calls block until the loop has processed them and published their
  // effects (snapshot, progress events), and rethrow its errors.
  SubmitResult submit(const std::string& team_id, const std::string& player_id, const tune::TuneParameters& params);
  void cancel(const std::string& job_id);
  void add_team(const std::string& team_id);

  /// Runs fn on the loop thread against the manager and returns its result.
  template <typename Fn>
  auto query(Fn&& fn) -> decltype(fn(std::declval<const JobManager&>()));

  // Worker-facing posts; processed asynchronously in order.
  void post_register(SessionId session, WorkerHello hello, std::shared_ptr<WorkerLink> link);
  void post_interim(SessionId session, std::string worker_id, std::string job_id, histo::HistogramSet chunk);
  void post_heartbeat(SessionId session, std::string worker_id);
  void post_disconnect(SessionId session, std::string worker_id);
  void post_tick();
  /// Counts as a processed command without touching state.
  void post_noop();

  /// Blocks until every command posted before this call has been processed.
  void sync();

  std::shared_ptr<const Snapshot> snapshot() const;
  ProgressHub& hub() { return hub_; }
  std::uint64_t commands_processed() const { return processed_.load(); }
  TimeMs heartbeat_interval_ms() const { return heartbeat_ms_; }

 private:
  using Command = std::function<void(JobManager&)>;

  void post(Command c);
  void run();
  void flush();
  bool owns(SessionId session, const std::string& worker_id) const;
  void drop(const std::string& worker_id);

  JobManager manager_;
  Clock clock_;
  TimeMs heartbeat_ms_;
  bool timer_;
  ProgressHub hub_;

  struct LinkEntry {
    SessionId session;
    std::shared_ptr<WorkerLink> link;
  };
  std::map<std::string, LinkEntry> links_;  // loop thread only
  std::vector<std::function<void()>> replies_;  // answered once the command's effects are published

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Command> queue_;
  bool stopping_ = false;
  std::shared_ptr<const Snapshot> snapshot_;
  std::uint64_t snapshot_version_ = 0;
  std::atomic<std::uint64_t> processed_{0};
  std::thread thread_;
};

template <typename Fn>
auto ManagerLoop::query(Fn&& fn) -> decltype(fn(std::declval<const JobManager&>())) {
  using R = decltype(fn(std::declval<const JobManager&>()));
  auto promise = std::make_shared<std::promise<R>>();
  auto future = promise->get_future();
  post([promise, f = std::forward<Fn>(fn)](JobManager& m) mutable {
    try {
      if constexpr (std::is_void_v<R>) {
        f(std::as_const(m));
        promise->set_value();
      } else {
        promise->set_value(f(std::as_const(m)));
      }
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  });
  return future.get();
}

}  // namespace tunegrid::jobs
