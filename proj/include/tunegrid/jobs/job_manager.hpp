#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tunegrid/jobs/types.hpp"

namespace tunegrid::jobs {

/// Player credit for a completed tune: round(100 / (1 + reduced chi2)).
std::uint64_t player_credit(double reduced_chi2);

/// Donor points for accepted events: one per `events_per_point`, rounded down.
constexpr std::uint64_t donor_points(std::uint64_t events, std::uint64_t events_per_point) {
  return events / events_per_point;
}

/**
 * Worker registry, team-scoped dispatch and job lifecycle.
 *
 * A plain single-threaded state machine: every operation mutates state and
 * queues its side effects (worker commands, progress events, dropped
 * workers) until take_effects() drains them. ManagerLoop serializes access
 * from threads; the simulator drives it directly.
 *
 * Dispatch is fair-share per team: with W workers and J active jobs each job
 * gets floor(W/J) or ceil(W/J) workers, older jobs taking the larger share.
 * Idle workers are placed first (lowest worker_id first); remaining deficits
 * are filled by preempting from the job holding the most surplus workers,
 * newest assignment first, ties by lowest worker_id.
 */
class JobManager {
 public:
  /// Seed offsets reserved per assignment; workers continue chunk_seed + i locally.
  static constexpr std::uint64_t kSeedsPerAssignment = std::uint64_t{1} << 32;

  struct Effects {
    std::vector<WorkerCommand> commands;
    std::vector<ProgressEvent> events;
    std::vector<std::string> dropped_workers;  // heartbeat timeouts
  };

  JobManager(gen::GeneratorModel model, tune::TuneParameters truth, ManagerConfig config = {});

  void add_team(const std::string& team_id);
  bool has_team(const std::string& team_id) const { return teams_.contains(team_id); }

  /// Throws kUnknownTeam / kOutOfSpace.
  SubmitResult submit(const std::string& team_id, const std::string& player_id, const tune::TuneParameters& params,
                      TimeMs now);

  /// Throws kDuplicateWorker / kUnknownTeam. Returns the job the worker was placed on, if any.
  std::optional<std::string> register_worker(const std::string& worker_id, const std::string& team_id,
                                             double capability, const std::string& owner, TimeMs now);

  /// One scheduling pass over every team. Idempotent once balanced.
  DispatchResult dispatch();

  /// Throws kUnknownWorker / kUnknownJob / kSchemaMismatch.
  InterimOutcome on_interim(const std::string& worker_id, const std::string& job_id, const histo::HistogramSet& chunk,
                            TimeMs now);

  /// Throws kUnknownJob; kInvalidState if the job already finished.
  void cancel(const std::string& job_id, TimeMs now);

  /// Throws kUnknownWorker.
  void on_disconnect(const std::string& worker_id);

  /// Any message from a worker counts as a heartbeat. Throws kUnknownWorker.
  void on_heartbeat(const std::string& worker_id, TimeMs now);

  /// Sends PINGs once per interval and drops workers silent for timeout_intervals intervals.
  void tick(TimeMs now);

  Effects take_effects();

  const Job& job(const std::string& job_id) const;
  const std::map<std::string, Job>& jobs() const { return jobs_; }
  const std::map<std::string, WorkerRecord>& workers() const { return workers_; }
  const CreditLedger& credits() const { return credits_; }
  const tune::InterpolationCache& cache() const { return cache_; }
  const histo::ReferenceSet& reference() const { return reference_; }
  const gen::GeneratorModel& model() const { return model_; }
  const ManagerConfig& config() const { return config_; }
  const Counters& counters() const { return counters_; }
  const std::set<std::string>& teams() const { return teams_; }

  std::size_t worker_count(const std::string& job_id) const;

  Snapshot snapshot() const;

 private:
  Job& find_job(const std::string& job_id);
  WorkerRecord& find_worker(const std::string& worker_id);
  void dispatch_team(const std::string& team_id, DispatchResult& out);
  void assign(WorkerRecord& w, Job& job, DispatchResult& out);
  void release(WorkerRecord& w, AbortReason reason);
  void complete(Job& job, TimeMs now);
  ProgressEvent progress(const Job& job, ProgressKind kind) const;

  gen::GeneratorModel model_;
  tune::TuneParameters truth_;
  histo::ReferenceSet reference_;
  ManagerConfig config_;
  tune::InterpolationCache cache_;
  gen::Rng seed_stream_;

  std::set<std::string> teams_;
  std::map<std::string, Job> jobs_;
  std::map<std::string, WorkerRecord> workers_;
  CreditLedger credits_;
  Counters counters_;
  std::uint64_t next_job_ = 1;
  std::uint64_t next_assignment_ = 1;
  TimeMs last_ping_ = 0;
  Effects effects_;
};

}  // namespace tunegrid::jobs
