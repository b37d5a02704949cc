#include "tunegrid/jobs/job_manager.hpp"

#include <algorithm>
#include <cmath>

#include "tunegrid/error.hpp"

namespace tunegrid::jobs {

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::kQueued: return "QUEUED";
    case JobState::kRunning: return "RUNNING";
    case JobState::kCompleted: return "COMPLETED";
    case JobState::kCancelled: return "CANCELLED";
  }
  return "?";
}

std::string_view to_string(WorkerState s) { return s == WorkerState::kIdle ? "IDLE" : "ASSIGNED"; }

std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::kCompleted: return "completed";
    case AbortReason::kPreempted: return "preempted";
    case AbortReason::kCancelled: return "cancelled";
  }
  return "?";
}

AbortReason abort_reason_from_string(std::string_view s) {
  if (s == "completed") return AbortReason::kCompleted;
  if (s == "preempted") return AbortReason::kPreempted;
  if (s == "cancelled") return AbortReason::kCancelled;
  throw Error(ErrorCode::kInvalidArgument, "unknown abort reason '" + std::string(s) + "'");
}

std::string_view to_string(ProgressKind k) {
  switch (k) {
    case ProgressKind::kEstimate: return "estimate";
    case ProgressKind::kInterim: return "interim";
    case ProgressKind::kCompleted: return "completed";
    case ProgressKind::kCancelled: return "cancelled";
  }
  return "?";
}

std::uint64_t player_credit(double reduced_chi2) {
  return static_cast<std::uint64_t>(std::llround(100.0 / (1.0 + reduced_chi2)));
}

const std::string& target_worker(const WorkerCommand& c) {
  return std::visit([](const auto& cmd) -> const std::string& { return cmd.worker_id; }, c);
}

JobManager::JobManager(gen::GeneratorModel model, tune::TuneParameters truth, ManagerConfig config)
    : model_(std::move(model)),
      truth_(std::move(truth)),
      reference_(gen::expected_reference(model_, truth_)),
      config_(config),
      cache_(model_.space(), config.cache_max_samples),
      seed_stream_(config.seed) {
  if (config_.chunk_events == 0 || config_.target_events == 0) {
    throw Error(ErrorCode::kConfig, "chunk and target event counts must be positive");
  }
  if (config_.heartbeat_interval_ms <= 0 || config_.heartbeat_timeout_intervals <= 0) {
    throw Error(ErrorCode::kConfig, "heartbeat interval and timeout must be positive");
  }
  if (config_.donor_events_per_point == 0) throw Error(ErrorCode::kConfig, "donor_events_per_point must be positive");
}

void JobManager::add_team(const std::string& team_id) {
  if (team_id.empty()) throw Error(ErrorCode::kInvalidArgument, "team id must not be empty");
  teams_.insert(team_id);
}

Job& JobManager::find_job(const std::string& job_id) {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::kUnknownJob, "unknown job '" + job_id + "'");
  return it->second;
}

const Job& JobManager::job(const std::string& job_id) const { return const_cast<JobManager*>(this)->find_job(job_id); }

WorkerRecord& JobManager::find_worker(const std::string& worker_id) {
  auto it = workers_.find(worker_id);
  if (it == workers_.end()) throw Error(ErrorCode::kUnknownWorker, "unknown worker '" + worker_id + "'");
  return it->second;
}

std::size_t JobManager::worker_count(const std::string& job_id) const {
  return static_cast<std::size_t>(std::count_if(workers_.begin(), workers_.end(), [&](const auto& kv) {
    return kv.second.current_job == job_id;
  }));
}

SubmitResult JobManager::submit(const std::string& team_id, const std::string& player_id,
                                const tune::TuneParameters& params, TimeMs now) {
  if (!has_team(team_id)) throw Error(ErrorCode::kUnknownTeam, "unknown team '" + team_id + "'");
  model_.space().check(params);

  Job job;
  job.sequence = next_job_++;
  job.job_id = "job-" + std::to_string(job.sequence);
  job.team_id = team_id;
  job.player_id = player_id;
  job.params = params;
  job.target_events = config_.target_events;
  job.merged = model_.empty_set(params);
  job.submitted_at = now;
  job.base_seed = gen::Seed{seed_stream_.next()};
  if (!cache_.empty()) job.estimate = cache_.estimate(params);

  auto [it, inserted] = jobs_.emplace(job.job_id, std::move(job));
  Job& stored = it->second;
  effects_.events.push_back(progress(stored, ProgressKind::kEstimate));
  dispatch();
  return SubmitResult{stored.job_id, stored.estimate};
}

std::optional<std::string> JobManager::register_worker(const std::string& worker_id, const std::string& team_id,
                                                       double capability, const std::string& owner, TimeMs now) {
  if (worker_id.empty()) throw Error(ErrorCode::kInvalidArgument, "worker id must not be empty");
  if (workers_.contains(worker_id)) {
    throw Error(ErrorCode::kDuplicateWorker, "worker '" + worker_id + "' is already connected");
  }
  if (!has_team(team_id)) throw Error(ErrorCode::kUnknownTeam, "unknown team '" + team_id + "'");
  WorkerRecord w;
  w.worker_id = worker_id;
  w.team_id = team_id;
  w.owner = owner.empty() ? worker_id : owner;
  w.capability = capability;
  w.last_heartbeat = now;
  workers_.emplace(worker_id, std::move(w));
  dispatch();
  return workers_.at(worker_id).current_job;
}

DispatchResult JobManager::dispatch() {
  DispatchResult out;
  for (const std::string& team : teams_) dispatch_team(team, out);
  return out;
}

void JobManager::dispatch_team(const std::string& team_id, DispatchResult& out) {
  std::vector<Job*> active;
  for (auto& [id, j] : jobs_) {
    if (j.team_id == team_id && is_active(j.state)) active.push_back(&j);
  }
  if (active.empty()) return;
  std::sort(active.begin(), active.end(), [](const Job* a, const Job* b) { return a->sequence < b->sequence; });

  std::vector<WorkerRecord*> team_workers;
  for (auto& [id, w] : workers_) {
    if (w.team_id == team_id) team_workers.push_back(&w);
  }
  const std::size_t total = team_workers.size();
  const std::size_t jobs = active.size();

  std::map<std::string, std::size_t> target;
  std::map<std::string, std::size_t> count;
  for (std::size_t i = 0; i < jobs; ++i) {
    target[active[i]->job_id] = total / jobs + (i < total % jobs ? 1 : 0);
    count[active[i]->job_id] = 0;
  }
  for (WorkerRecord* w : team_workers) {
    if (w->current_job) ++count[*w->current_job];
  }

  // Idle workers first, lowest worker_id first (map order).
  auto next_idle = team_workers.begin();
  for (Job* job : active) {
    while (count[job->job_id] < target[job->job_id]) {
      while (next_idle != team_workers.end() && (*next_idle)->state != WorkerState::kIdle) ++next_idle;
      if (next_idle == team_workers.end()) break;
      assign(**next_idle, *job, out);
      ++count[job->job_id];
    }
  }

  // Remaining deficits are filled by preemption from surplus jobs.
  for (Job* job : active) {
    while (count[job->job_id] < target[job->job_id]) {
      Job* victim_job = nullptr;
      for (Job* candidate : active) {
        const auto c = count[candidate->job_id];
        if (c <= target[candidate->job_id]) continue;
        if (victim_job == nullptr || c > count[victim_job->job_id] ||
            (c == count[victim_job->job_id] && candidate->sequence > victim_job->sequence)) {
          victim_job = candidate;
        }
      }
      if (victim_job == nullptr) break;
      WorkerRecord* victim = nullptr;
      for (WorkerRecord* w : team_workers) {
        if (w->current_job != victim_job->job_id) continue;
        if (victim == nullptr || w->assignment_sequence > victim->assignment_sequence) victim = w;
      }
      out.preemptions.push_back(Preemption{victim->worker_id, victim_job->job_id});
      ++counters_.preemptions;
      release(*victim, AbortReason::kPreempted);
      --count[victim_job->job_id];
      assign(*victim, *job, out);
      ++count[job->job_id];
    }
  }
}

void JobManager::assign(WorkerRecord& w, Job& job, DispatchResult& out) {
  w.state = WorkerState::kAssigned;
  w.current_job = job.job_id;
  w.assignment_sequence = next_assignment_++;
  const gen::Seed seed = gen::derive_chunk_seed(job.base_seed, job.next_chunk_index);
  job.next_chunk_index += kSeedsPerAssignment;
  ++job.assignments_issued;
  if (job.state == JobState::kQueued) job.state = JobState::kRunning;
  out.assignments.push_back(Assignment{w.worker_id, job.job_id, config_.chunk_events, seed});
  effects_.commands.push_back(AssignCommand{w.worker_id, job.job_id, job.params, config_.chunk_events, seed});
}

void JobManager::release(WorkerRecord& w, AbortReason reason) {
  effects_.commands.push_back(AbortCommand{w.worker_id, *w.current_job, reason});
  w.state = WorkerState::kIdle;
  w.current_job.reset();
}

InterimOutcome JobManager::on_interim(const std::string& worker_id, const std::string& job_id,
                                      const histo::HistogramSet& chunk, TimeMs now) {
  WorkerRecord& w = find_worker(worker_id);
  w.last_heartbeat = now;
  Job& job = find_job(job_id);
  if (w.current_job != job_id || job.state != JobState::kRunning) {
    ++counters_.stale_results;
    return InterimOutcome::kStale;
  }
  if (chunk.params != job.params || !histo::same_schema(job.merged, chunk)) {
    throw Error(ErrorCode::kSchemaMismatch, "interim for '" + job_id + "' does not match the job's schema");
  }
  chunk.validate();
  histo::merge_into(job.merged, chunk);
  job.merged_events = job.merged.n_events;
  Contribution& c = job.contributions[worker_id];
  c.owner = w.owner;
  c.events += chunk.n_events;
  w.events_contributed[job_id] += chunk.n_events;
  ++counters_.chunks_accepted;
  counters_.events_accepted += chunk.n_events;
  effects_.events.push_back(progress(job, ProgressKind::kInterim));

  if (job.merged_events >= job.target_events) {
    complete(job, now);
    dispatch();
  }
  return InterimOutcome::kAccepted;
}

void JobManager::complete(Job& job, TimeMs now) {
  job.fit = histo::fit_score_set(job.merged, reference_);
  job.state = JobState::kCompleted;
  job.completed_at = now;
  for (auto& [id, w] : workers_) {
    if (w.current_job == job.job_id) release(w, AbortReason::kCompleted);
  }
  cache_.add_sample(job.params, job.merged);

  const auto credit = player_credit(job.fit->reduced);
  job.player_credit = credit;
  credits_.player_points[job.player_id] += credit;
  for (const auto& [worker_id, c] : job.contributions) {
    credits_.donor_points[c.owner] += donor_points(c.events, config_.donor_events_per_point);
  }
  effects_.events.push_back(progress(job, ProgressKind::kCompleted));
}

void JobManager::cancel(const std::string& job_id, TimeMs now) {
  Job& job = find_job(job_id);
  if (!is_active(job.state)) {
    throw Error(ErrorCode::kInvalidState, "job '" + job_id + "' is already " + std::string(to_string(job.state)));
  }
  job.state = JobState::kCancelled;
  job.completed_at = now;
  for (auto& [id, w] : workers_) {
    if (w.current_job == job_id) release(w, AbortReason::kCancelled);
  }
  effects_.events.push_back(progress(job, ProgressKind::kCancelled));
  dispatch();
}

void JobManager::on_disconnect(const std::string& worker_id) {
  find_worker(worker_id);
  workers_.erase(worker_id);
  dispatch();
}

void JobManager::on_heartbeat(const std::string& worker_id, TimeMs now) { find_worker(worker_id).last_heartbeat = now; }

void JobManager::tick(TimeMs now) {
  const TimeMs timeout = config_.heartbeat_interval_ms * config_.heartbeat_timeout_intervals;
  std::vector<std::string> dropped;
  for (const auto& [id, w] : workers_) {
    if (now - w.last_heartbeat > timeout) dropped.push_back(id);
  }
  for (const auto& id : dropped) {
    workers_.erase(id);
    effects_.dropped_workers.push_back(id);
  }
  if (now - last_ping_ >= config_.heartbeat_interval_ms) {
    last_ping_ = now;
    for (const auto& [id, w] : workers_) effects_.commands.push_back(PingCommand{id});
  }
  if (!dropped.empty()) dispatch();
}

JobManager::Effects JobManager::take_effects() { return std::exchange(effects_, Effects{}); }

ProgressEvent JobManager::progress(const Job& job, ProgressKind kind) const {
  ProgressEvent e;
  e.job_id = job.job_id;
  e.kind = kind;
  e.merged_events = job.merged_events;
  e.target_events = job.target_events;
  if (kind == ProgressKind::kEstimate) {
    if (job.estimate) {
      e.histograms = job.estimate->histograms;
      e.estimate_quality = job.estimate->quality;
    }
  } else {
    e.histograms = job.merged;
  }
  e.fit = job.fit;
  e.player_credit = job.player_credit;
  e.worker_count = worker_count(job.job_id);
  return e;
}

Snapshot JobManager::snapshot() const {
  Snapshot s;
  s.credits = credits_;
  s.counters = counters_;
  std::map<std::string, std::size_t> per_job;
  for (const auto& [id, w] : workers_) {
    WorkerView v{w.worker_id, w.team_id, w.owner, w.capability, w.state, w.current_job, 0};
    for (const auto& [j, n] : w.events_contributed) v.events_total += n;
    if (w.current_job) ++per_job[*w.current_job];
    s.workers.push_back(std::move(v));
  }
  std::vector<const Job*> ordered;
  for (const auto& [id, j] : jobs_) ordered.push_back(&j);
  std::sort(ordered.begin(), ordered.end(), [](const Job* a, const Job* b) { return a->sequence < b->sequence; });
  for (const Job* j : ordered) {
    s.jobs.push_back(JobView{j->job_id, j->team_id, j->player_id, j->params, j->state, j->merged_events,
                             j->target_events, per_job[j->job_id], j->fit, j->player_credit, j->submitted_at,
                             j->completed_at});
  }
  for (const std::string& team : teams_) {
    TeamView t;
    t.team_id = team;
    std::set<std::string> players;
    for (const auto& [id, w] : workers_) t.workers += w.team_id == team ? 1 : 0;
    for (const Job* j : ordered) {
      if (j->team_id != team) continue;
      players.insert(j->player_id);
      if (is_active(j->state)) ++t.active_jobs;
      if (j->player_credit) t.points += *j->player_credit;
    }
    t.players.assign(players.begin(), players.end());
    s.teams.push_back(std::move(t));
  }
  return s;
}

}  // namespace tunegrid::jobs
