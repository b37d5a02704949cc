#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tunegrid::testkit {

struct RegistryTraceReport {
  std::size_t actions = 0;
  std::size_t accepted = 0;
  std::size_t refused = 0;
  std::size_t launches = 0;
  std::size_t store_checks = 0;
  std::vector<std::string> violations;
};

/**
 * Random principals issue random registry actions. Each outcome (success or
 * error code) is compared with an independent model of the ownership and
 * membership rules, every launch context is checked against the team_id
 * stored at attach time, and the store file is reloaded and compared with the
 * live state every `check_every` actions and at the end.
 */
RegistryTraceReport run_registry_trace(std::uint64_t seed, std::size_t actions, const std::filesystem::path& store,
                                       std::size_t check_every = 25);

}  // namespace tunegrid::testkit
