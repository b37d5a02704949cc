#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tunegrid/app/config.hpp"
#include "tunegrid/jobs/types.hpp"

namespace tunegrid::app {

struct SimulateOptions {
  std::size_t workers = 8;
  /// Maximum number of jobs the scripted player submits.
  std::size_t budget = 30;
  std::uint64_t seed = 1;
  std::string strategy = "coordinate-scan";
  gen::GeneratorModel model = gen::GeneratorModel::default_model();
  tune::TuneParameters truth = default_truth();
  /// Manager settings; `seed` is overwritten by the run seed.
  jobs::ManagerConfig jobs;
  /// Virtual events per millisecond of the slowest worker.
  double events_per_ms = 10.0;
  /// Worker i runs at events_per_ms * (1 + speed_spread * i / (workers - 1)).
  double speed_spread = 0.0;
  /// Probability that a worker leaves right after delivering a chunk.
  double churn = 0.0;
  /// Virtual delay before a departed worker reconnects.
  jobs::TimeMs rejoin_ms = 1000;
  std::size_t sweeps = 2;
  std::size_t probes = 5;
};

struct SimulatedJob {
  std::size_t index = 0;
  std::string job_id;
  tune::TuneParameters params;
  jobs::JobState state = jobs::JobState::kQueued;
  std::optional<histo::FitScore> fit;
  std::optional<std::uint64_t> player_credit;
  std::optional<double> estimate_quality;  // absent when the cache was empty
  std::uint64_t merged_events = 0;
  std::size_t interims = 0;
  bool estimate_first = false;  // the estimate event preceded every interim
  jobs::TimeMs submitted_ms = 0;
  std::optional<jobs::TimeMs> completed_ms;
};

struct SeriesPoint {
  std::size_t job = 0;
  double reduced = 0.0;
  double best = 0.0;
};

struct SimulationReport {
  SimulateOptions options;
  std::vector<SimulatedJob> jobs;
  std::optional<std::size_t> best;  // index into jobs
  /// Submitted jobs were left waiting with nothing able to run them.
  bool starved = false;
  jobs::TimeMs virtual_ms = 0;
  double wall_ms = 0.0;
  std::uint64_t events_total = 0;
  std::uint64_t preemptions = 0;
  std::size_t reconnects = 0;
  jobs::CreditLedger credits;
  std::vector<SeriesPoint> series;

  std::size_t completed() const;
  double virtual_events_per_sec() const;
  double wall_events_per_sec() const;
};

/**
 * Headless end-to-end run: one manager, K simulated workers and a scripted
 * player, advanced as a discrete-event simulation on a virtual clock. Chunk
 * histograms come from the real generator, so fits and credits are the ones
 * a live deployment would produce. Identical options give identical reports
 * apart from wall_ms.
 *
 * Coordinate scan: start at the space center; for each sweep and each dim,
 * probe `probes` evenly spaced values over the full range (the incumbent's
 * own value is not resubmitted), run the probes concurrently and keep the
 * argmin of reduced chi2 when it beats the incumbent.
 */
SimulationReport simulate(const SimulateOptions& options);

nlohmann::json to_json(const SimulationReport& r);

/// Fixed-width table of jobs followed by a summary block.
std::string format_table(const SimulationReport& r);

/// Equal apart from wall time.
bool same_run(const SimulationReport& a, const SimulationReport& b);

}  // namespace tunegrid::app
