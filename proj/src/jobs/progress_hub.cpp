#include "tunegrid/jobs/progress_hub.hpp"

namespace tunegrid::jobs {

std::optional<ProgressEvent> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; })) return std::nullopt;
  if (queue_.empty()) return std::nullopt;
  ProgressEvent e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

bool Subscription::finished() const {
  std::lock_guard lock(mu_);
  return closed_ && queue_.empty();
}

void Subscription::push(ProgressEvent e) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(e));
  }
  cv_.notify_all();
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

void ProgressHub::publish(const ProgressEvent& e) {
  std::lock_guard lock(mu_);
  history_[e.job_id].push_back(e);
  auto it = subscribers_.find(e.job_id);
  if (it == subscribers_.end()) return;
  auto& subs = it->second;
  for (auto& weak : subs) {
    if (auto sub = weak.lock()) {
      sub->push(e);
      if (is_terminal(e.kind)) sub->close();
    }
  }
  if (is_terminal(e.kind)) {
    subscribers_.erase(it);
  } else {
    std::erase_if(subs, [](const auto& w) { return w.expired(); });
  }
}

std::shared_ptr<Subscription> ProgressHub::subscribe(const std::string& job_id, Replay replay) {
  std::lock_guard lock(mu_);
  auto it = history_.find(job_id);
  if (it == history_.end()) return nullptr;
  const auto& history = it->second;
  auto sub = std::make_shared<Subscription>();
  if (replay == Replay::kHistory) {
    for (const auto& e : history) sub->push(e);
  } else {
    sub->push(history.back());
  }
  if (is_terminal(history.back().kind)) {
    sub->close();
  } else {
    subscribers_[job_id].push_back(sub);
  }
  return sub;
}

std::optional<ProgressEvent> ProgressHub::latest(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = history_.find(job_id);
  if (it == history_.end()) return std::nullopt;
  return it->second.back();
}

}  // namespace tunegrid::jobs
