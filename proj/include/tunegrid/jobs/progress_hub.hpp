#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tunegrid/jobs/types.hpp"

namespace tunegrid::jobs {

/// One subscriber's ordered view of a job's progress events.
class Subscription {
 public:
  /// Next event, or nullopt once the stream is closed and drained (or on timeout).
  std::optional<ProgressEvent> next(std::chrono::milliseconds timeout = std::chrono::hours(24));

  bool finished() const;

 private:
  friend class ProgressHub;
  void push(ProgressEvent e);
  void close();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<ProgressEvent> queue_;
  bool closed_ = false;
};

/**
 * Fan-out of progress events to any number of subscribers.
 *
 * publish() never blocks on a slow subscriber: every subscription owns an
 * unbounded queue. A new subscription is primed with the job's latest event,
 * so late subscribers see the current state first; after a terminal event
 * the subscription closes. kHistory subscribers get every event of the job
 * from its estimate on.
 */
class ProgressHub {
 public:
  enum class Replay { kLatest, kHistory };

  void publish(const ProgressEvent& e);

  /// nullptr when nothing has been published for the job.
  std::shared_ptr<Subscription> subscribe(const std::string& job_id, Replay replay = Replay::kLatest);

  std::optional<ProgressEvent> latest(const std::string& job_id) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::vector<ProgressEvent>> history_;
  std::map<std::string, std::vector<std::weak_ptr<Subscription>>> subscribers_;
};

}  // namespace tunegrid::jobs
