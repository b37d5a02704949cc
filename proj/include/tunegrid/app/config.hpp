#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tunegrid/gen/generator.hpp"
#include "tunegrid/jobs/types.hpp"

namespace tunegrid::app {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;

  std::string str() const { return host + ":" + std::to_string(port); }
  bool operator==(const Endpoint&) const = default;
};

/// "host:port"; throws kConfig.
Endpoint parse_endpoint(const std::string& text);

/// Hidden truth of the default model; sits on the 5-point probe grid of every dim.
tune::TuneParameters default_truth();

struct ServerConfig {
  gen::GeneratorModel model = gen::GeneratorModel::default_model();
  tune::TuneParameters truth = default_truth();
  jobs::ManagerConfig jobs;
  Endpoint http{"127.0.0.1", 8080};
  Endpoint workers{"127.0.0.1", 7700};
  /// Endpoint written into launch contexts; defaults to the bound worker endpoint.
  std::string advertised_endpoint;
  std::filesystem::path registry_store;
  std::filesystem::path static_dir;
  /// Teams available before any group attaches them.
  std::vector<std::string> teams;
};

/**
 * Parses a server config document. Every section is optional:
 *
 *   {"model": {"space": [...], "observables": [...]},
 *    "truth": [..] | {"a1": .., ...},
 *    "jobs": {"target_events", "chunk_events", "heartbeat_interval_ms",
 *             "heartbeat_timeout_intervals", "cache_max_samples", "seed",
 *             "donor_events_per_point"},
 *    "listen": {"http": "host:port", "workers": "host:port"},
 *    "registry": {"store": path, "advertised_endpoint": "host:port"},
 *    "ui": {"static_dir": path},
 *    "teams": ["T-1", ...]}
 *
 * Relative paths resolve against `base_dir`. Throws kConfig.
 */
ServerConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Throws kConfig for unreadable or malformed files.
ServerConfig load_config(const std::filesystem::path& path);

/// Parameters as an array in dim order or an object keyed by dim name. Throws kConfig.
tune::TuneParameters parse_params(const tune::ParamSpace& space, const nlohmann::json& j);

}  // namespace tunegrid::app
