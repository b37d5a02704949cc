#include "tunegrid/service/api_json.hpp"

#include <algorithm>

namespace tunegrid {
namespace tune {

void to_json(nlohmann::json& j, const Estimate& e) { j = {{"histograms", e.histograms}, {"quality", e.quality}}; }

}  // namespace tune

namespace jobs {
namespace {

template <typename T>
nlohmann::json or_null(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

ProgressKind kind_from_string(const std::string& s) {
  for (auto k : {ProgressKind::kEstimate, ProgressKind::kInterim, ProgressKind::kCompleted, ProgressKind::kCancelled}) {
    if (to_string(k) == s) return k;
  }
  throw nlohmann::json::other_error::create(501, "unknown progress kind '" + s + "'", nullptr);
}

nlohmann::json ranked(const std::map<std::string, std::uint64_t>& points, const char* key) {
  std::vector<std::pair<std::string, std::uint64_t>> rows(points.begin(), points.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [id, n] : rows) out.push_back({{key, id}, {"points", n}});
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const ProgressEvent& e) {
  j = {{"job_id", e.job_id},
       {"kind", to_string(e.kind)},
       {"merged_events", e.merged_events},
       {"target_events", e.target_events},
       {"histograms", or_null(e.histograms)},
       {"estimate_quality", or_null(e.estimate_quality)},
       {"fit", or_null(e.fit)},
       {"player_credit", or_null(e.player_credit)},
       {"worker_count", e.worker_count}};
}

void from_json(const nlohmann::json& j, ProgressEvent& e) {
  e.job_id = j.at("job_id").get<std::string>();
  e.kind = kind_from_string(j.at("kind").get<std::string>());
  e.merged_events = j.at("merged_events").get<std::uint64_t>();
  e.target_events = j.at("target_events").get<std::uint64_t>();
  e.histograms.reset();
  if (!j.at("histograms").is_null()) e.histograms = j.at("histograms").get<histo::HistogramSet>();
  e.estimate_quality.reset();
  if (!j.at("estimate_quality").is_null()) e.estimate_quality = j.at("estimate_quality").get<double>();
  e.fit.reset();
  if (!j.at("fit").is_null()) e.fit = j.at("fit").get<histo::FitScore>();
  e.player_credit.reset();
  if (!j.at("player_credit").is_null()) e.player_credit = j.at("player_credit").get<std::uint64_t>();
  e.worker_count = j.at("worker_count").get<std::size_t>();
}

void to_json(nlohmann::json& j, const WorkerView& w) {
  j = {{"worker_id", w.worker_id},     {"team_id", w.team_id},         {"owner", w.owner},
       {"capability", w.capability},   {"state", to_string(w.state)}, {"current_job", or_null(w.current_job)},
       {"events_total", w.events_total}};
}

void to_json(nlohmann::json& j, const JobView& v) {
  j = {{"job_id", v.job_id},
       {"team_id", v.team_id},
       {"player_id", v.player_id},
       {"params", v.params},
       {"state", to_string(v.state)},
       {"merged_events", v.merged_events},
       {"target_events", v.target_events},
       {"worker_count", v.worker_count},
       {"fit", or_null(v.fit)},
       {"player_credit", or_null(v.player_credit)},
       {"submitted_at_ms", v.submitted_at},
       {"completed_at_ms", or_null(v.completed_at)}};
}

void to_json(nlohmann::json& j, const TeamView& t) {
  j = {{"team_id", t.team_id},
       {"workers", t.workers},
       {"active_jobs", t.active_jobs},
       {"players", t.players},
       {"points", t.points}};
}

void to_json(nlohmann::json& j, const Counters& c) {
  j = {{"stale_results", c.stale_results},
       {"preemptions", c.preemptions},
       {"chunks_accepted", c.chunks_accepted},
       {"events_accepted", c.events_accepted}};
}

nlohmann::json leaderboard_json(const CreditLedger& credits) {
  return {{"players", ranked(credits.player_points, "player_id")}, {"donors", ranked(credits.donor_points, "owner")}};
}

}  // namespace jobs
}  // namespace tunegrid
