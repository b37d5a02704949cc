#pragma once

#include <nlohmann/json.hpp>

#include "tunegrid/histo/json.hpp"
#include "tunegrid/jobs/types.hpp"

// API documents for job-manager state. Field names are part of the HTTP API.

namespace tunegrid::tune {
void to_json(nlohmann::json& j, const Estimate& e);
}  // namespace tunegrid::tune

namespace tunegrid::jobs {
void to_json(nlohmann::json& j, const ProgressEvent& e);
void from_json(const nlohmann::json& j, ProgressEvent& e);
void to_json(nlohmann::json& j, const WorkerView& w);
void to_json(nlohmann::json& j, const JobView& v);
void to_json(nlohmann::json& j, const TeamView& t);
void to_json(nlohmann::json& j, const Counters& c);

/// {"players": [{"player_id", "points"}...], "donors": [{"owner", "points"}...]}, highest first.
nlohmann::json leaderboard_json(const CreditLedger& credits);
}  // namespace tunegrid::jobs
