#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tunegrid/gen/generator.hpp"
#include "tunegrid/histo/fit.hpp"
#include "tunegrid/histo/histogram.hpp"
#include "tunegrid/tune/interpolation_cache.hpp"

namespace tunegrid::jobs {

/// Milliseconds on the manager's clock (steady, arbitrary epoch).
using TimeMs = std::int64_t;

enum class JobState { kQueued, kRunning, kCompleted, kCancelled };
enum class WorkerState { kIdle, kAssigned };
enum class AbortReason { kCompleted, kPreempted, kCancelled };

std::string_view to_string(JobState s);
std::string_view to_string(WorkerState s);
std::string_view to_string(AbortReason r);
AbortReason abort_reason_from_string(std::string_view s);

inline bool is_active(JobState s) { return s == JobState::kQueued || s == JobState::kRunning; }

struct ManagerConfig {
  std::uint64_t target_events = 100000;
  std::uint64_t chunk_events = 10000;
  TimeMs heartbeat_interval_ms = 5000;
  int heartbeat_timeout_intervals = 3;
  std::size_t cache_max_samples = tune::InterpolationCache::kDefaultMaxSamples;
  /// Seeds the stream of per-job base seeds.
  std::uint64_t seed = 1;
  std::uint64_t donor_events_per_point = 10000;
};

struct Contribution {
  std::string owner;
  std::uint64_t events = 0;
};

struct Job {
  std::string job_id;
  std::uint64_t sequence = 0;  // submission order, older first
  std::string team_id;
  std::string player_id;
  tune::TuneParameters params;
  std::uint64_t target_events = 0;
  JobState state = JobState::kQueued;
  std::optional<tune::Estimate> estimate;
  histo::HistogramSet merged;
  std::uint64_t merged_events = 0;
  TimeMs submitted_at = 0;
  std::optional<TimeMs> completed_at;
  gen::Seed base_seed;
  std::uint64_t next_chunk_index = 0;
  std::optional<histo::FitScore> fit;
  std::optional<std::uint64_t> player_credit;
  /// Accepted events per worker_id, kept after the worker leaves.
  std::map<std::string, Contribution> contributions;
  std::uint64_t assignments_issued = 0;
};

struct WorkerRecord {
  std::string worker_id;
  std::string team_id;
  std::string owner;
  double capability = 0.0;  // advertised events/sec; recorded, not used for placement
  WorkerState state = WorkerState::kIdle;
  std::optional<std::string> current_job;
  std::uint64_t assignment_sequence = 0;  // recency of the current assignment
  TimeMs last_heartbeat = 0;
  std::map<std::string, std::uint64_t> events_contributed;
};

struct CreditLedger {
  std::map<std::string, std::uint64_t> player_points;
  std::map<std::string, std::uint64_t> donor_points;
};

// Commands the manager sends to worker agents.
struct AssignCommand {
  std::string worker_id;
  std::string job_id;
  tune::TuneParameters params;
  std::uint64_t chunk_events = 0;
  gen::Seed chunk_seed;
};
struct AbortCommand {
  std::string worker_id;
  std::string job_id;
  AbortReason reason = AbortReason::kPreempted;
};
struct PingCommand {
  std::string worker_id;
};
using WorkerCommand = std::variant<AssignCommand, AbortCommand, PingCommand>;

const std::string& target_worker(const WorkerCommand& c);

enum class ProgressKind { kEstimate, kInterim, kCompleted, kCancelled };
std::string_view to_string(ProgressKind k);
inline bool is_terminal(ProgressKind k) { return k == ProgressKind::kCompleted || k == ProgressKind::kCancelled; }

struct ProgressEvent {
  std::string job_id;
  ProgressKind kind = ProgressKind::kEstimate;
  std::uint64_t merged_events = 0;
  std::uint64_t target_events = 0;
  /// Estimate for kind == estimate, merged results otherwise. Absent when no estimate exists.
  std::optional<histo::HistogramSet> histograms;
  std::optional<double> estimate_quality;
  std::optional<histo::FitScore> fit;
  std::optional<std::uint64_t> player_credit;
  std::size_t worker_count = 0;
};

struct Assignment {
  std::string worker_id;
  std::string job_id;
  std::uint64_t chunk_events = 0;
  gen::Seed chunk_seed;
};

struct Preemption {
  std::string worker_id;
  std::string job_id;  // job the worker was taken from
};

struct DispatchResult {
  std::vector<Assignment> assignments;
  std::vector<Preemption> preemptions;
};

struct SubmitResult {
  std::string job_id;
  std::optional<tune::Estimate> estimate;
};

enum class InterimOutcome { kAccepted, kStale };

// Read-only views published after every command.
struct WorkerView {
  std::string worker_id;
  std::string team_id;
  std::string owner;
  double capability = 0.0;
  WorkerState state = WorkerState::kIdle;
  std::optional<std::string> current_job;
  std::uint64_t events_total = 0;
};

struct JobView {
  std::string job_id;
  std::string team_id;
  std::string player_id;
  tune::TuneParameters params;
  JobState state = JobState::kQueued;
  std::uint64_t merged_events = 0;
  std::uint64_t target_events = 0;
  std::size_t worker_count = 0;
  std::optional<histo::FitScore> fit;
  std::optional<std::uint64_t> player_credit;
  TimeMs submitted_at = 0;
  std::optional<TimeMs> completed_at;
};

struct TeamView {
  std::string team_id;
  std::size_t workers = 0;
  std::size_t active_jobs = 0;
  std::vector<std::string> players;
  std::uint64_t points = 0;  // player credits earned by the team's members on its jobs
};

struct Counters {
  std::uint64_t stale_results = 0;
  std::uint64_t preemptions = 0;
  std::uint64_t chunks_accepted = 0;
  std::uint64_t events_accepted = 0;
};

struct Snapshot {
  std::uint64_t version = 0;
  std::vector<WorkerView> workers;
  std::vector<JobView> jobs;
  std::vector<TeamView> teams;
  CreditLedger credits;
  Counters counters;
};

}  // namespace tunegrid::jobs
