#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tunegrid/jobs/job_manager.hpp"

namespace tunegrid::testkit {

enum class Backend { kDirect, kInProc, kTcp };

std::string_view to_string(Backend b);

struct ChurnConfig {
  std::uint64_t seed = 1;
  std::size_t commands = 1000;
  std::size_t teams = 3;
  std::uint64_t chunk_events = 200;
  std::uint64_t target_events = 1000;
  jobs::TimeMs heartbeat_interval_ms = 1000;
};

struct ChurnReport {
  /// Canonical manager state after every command, including the drain phase.
  std::vector<std::string> trace;
  std::vector<std::string> violations;
  std::size_t submitted = 0;
  std::size_t completed = 0;
  std::size_t cancelled = 0;
  std::uint64_t stale_results = 0;
  std::uint64_t preemptions = 0;
  std::uint64_t timeouts = 0;
  /// Every submitted job reached COMPLETED or CANCELLED once workers persisted.
  bool all_terminated = false;
};

/**
 * Replays one randomized churn trace (submits, cancels, worker joins and
 * leaves, duplicate joins, interims, late interims, silent workers and
 * heartbeat ticks) against the chosen backend. Worker behaviour is scripted
 * and stepped synchronously, so every backend sees the same command order
 * and the traces are comparable line by line.
 */
ChurnReport run_churn(const ChurnConfig& config, Backend backend);

/// Scheduler invariants over one manager state; empty when all hold.
std::vector<std::string> check_invariants(const jobs::JobManager& m);

}  // namespace tunegrid::testkit
