#include "tunegrid/service/service.hpp"

#include <chrono>

#include "tunegrid/service/api_json.hpp"

namespace tunegrid::service {
namespace {

const json& field(const json& body, const char* name) {
  if (!body.is_object() || !body.contains(name)) {
    throw Error(ErrorCode::kInvalidArgument, std::string("missing field '") + name + "'");
  }
  return body.at(name);
}

std::string text(const json& body, const char* name) {
  const json& v = field(body, name);
  if (!v.is_string()) throw Error(ErrorCode::kInvalidArgument, std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::string optional_text(const json& body, const char* name) {
  return body.is_object() && body.contains(name) ? text(body, name) : std::string();
}

}  // namespace

Service::Service(jobs::ManagerLoop& loop, registry::Registry& registry, gen::GeneratorModel model,
                 histo::ReferenceSet reference)
    : loop_(loop), registry_(registry), model_(std::move(model)), reference_(std::move(reference)) {}

void Service::sync_teams() {
  for (const auto& team : registry_.team_ids()) loop_.add_team(team);
}

json Service::list_apps() const {
  json out = json::array();
  for (const auto& [id, app] : registry_.snapshot()->apps) out.push_back(app);
  return out;
}

json Service::register_app(const json& body) {
  const auto id = registry_.register_app(text(body, "user"), text(body, "name"), optional_text(body, "description"),
                                         optional_text(body, "worker_image_ref"));
  return registry_.snapshot()->apps.at(id);
}

json Service::list_groups() const {
  json out = json::array();
  for (const auto& [id, g] : registry_.snapshot()->groups) out.push_back(g);
  return out;
}

json Service::create_group(const json& body) {
  const auto id = registry_.create_group(text(body, "user"));
  return registry_.snapshot()->groups.at(id);
}

json Service::join_group(const std::string& group_id, const json& body) {
  registry_.join_group(text(body, "user"), group_id);
  return registry_.snapshot()->groups.at(group_id);
}

json Service::attach_app(const std::string& group_id, const json& body) {
  const auto team_id = text(body, "team_id");
  registry_.attach_app(text(body, "user"), group_id, text(body, "app_id"), team_id, text(body, "team_alias"));
  loop_.add_team(team_id);
  return registry_.snapshot()->groups.at(group_id);
}

json Service::launch_worker(const std::string& group_id, const json& body) {
  return registry_.launch_worker(text(body, "user"), group_id, text(body, "team_alias"));
}

tune::TuneParameters Service::parse_params(const json& params) const {
  const auto& dims = model_.space().dims();
  tune::TuneParameters p;
  if (params.is_array()) {
    if (params.size() != dims.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "expected " + std::to_string(dims.size()) + " parameters, got " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (!params[i].is_number()) throw Error(ErrorCode::kInvalidArgument, "parameter '" + dims[i].name + "' must be a number");
      p.values.push_back(params[i].get<double>());
    }
  } else if (params.is_object()) {
    for (const auto& d : dims) {
      if (!params.contains(d.name) || !params.at(d.name).is_number()) {
        throw Error(ErrorCode::kInvalidArgument, "parameter '" + d.name + "' missing or not a number");
      }
      p.values.push_back(params.at(d.name).get<double>());
    }
    if (params.size() != dims.size()) throw Error(ErrorCode::kInvalidArgument, "unknown parameter names in request");
  } else {
    throw Error(ErrorCode::kInvalidArgument, "params must be an array or an object");
  }
  model_.space().check(p);
  return p;
}

json Service::submit(const json& body) {
  const auto started = std::chrono::steady_clock::now();
  const auto params = parse_params(field(body, "params"));
  const auto r = loop_.submit(text(body, "team"), text(body, "player"), params);
  const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
  return {{"job_id", r.job_id},
          {"estimate", r.estimate ? json(*r.estimate) : json(nullptr)},
          {"elapsed_ms", elapsed.count()}};
}

json Service::list_jobs() const {
  json out = json::array();
  for (const auto& j : loop_.snapshot()->jobs) out.push_back(j);
  return out;
}

json Service::job(const std::string& job_id) const {
  const auto snap = loop_.snapshot();
  for (const auto& j : snap->jobs) {
    if (j.job_id != job_id) continue;
    json out = j;
    auto latest = loop_.hub().latest(job_id);
    out["latest"] = latest ? json(*latest) : json(nullptr);
    return out;
  }
  throw Error(ErrorCode::kUnknownJob, "unknown job '" + job_id + "'");
}

json Service::cancel(const std::string& job_id) {
  loop_.cancel(job_id);
  return job(job_id);
}

std::shared_ptr<jobs::Subscription> Service::stream(const std::string& job_id, bool from_start) {
  using Replay = jobs::ProgressHub::Replay;
  auto sub = loop_.hub().subscribe(job_id, from_start ? Replay::kHistory : Replay::kLatest);
  if (!sub) throw Error(ErrorCode::kUnknownJob, "unknown job '" + job_id + "'");
  return sub;
}

json Service::status() const {
  const auto snap = loop_.snapshot();
  json workers = json::array(), jobs = json::array(), teams = json::array();
  for (const auto& w : snap->workers) workers.push_back(w);
  for (const auto& j : snap->jobs) jobs.push_back(j);
  for (const auto& t : snap->teams) teams.push_back(t);
  return {{"version", snap->version},
          {"workers", workers},
          {"jobs", jobs},
          {"teams", teams},
          {"leaderboard", jobs::leaderboard_json(snap->credits)},
          {"counters", snap->counters}};
}

json Service::leaderboard() const {
  const auto snap = loop_.snapshot();
  json out = jobs::leaderboard_json(snap->credits);
  json teams = json::array();
  for (const auto& t : snap->teams) teams.push_back({{"team_id", t.team_id}, {"points", t.points}});
  out["teams"] = teams;
  return out;
}

json Service::space() const {
  json reference = json::array();
  for (const auto& [id, r] : reference_) reference.push_back(r);
  return {{"dims", model_.space().dims()}, {"observables", model_.observables()}, {"reference", reference}};
}

int Service::http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOutOfSpace:
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kMalformedFrame:
    case ErrorCode::kConfig:
      return 400;
    case ErrorCode::kNotOwner:
    case ErrorCode::kNotMember:
      return 403;
    case ErrorCode::kUnknownTeam:
    case ErrorCode::kUnknownJob:
    case ErrorCode::kUnknownWorker:
    case ErrorCode::kUnknownGroup:
    case ErrorCode::kUnknownApp:
    case ErrorCode::kUnknownAlias:
      return 404;
    case ErrorCode::kDuplicateName:
    case ErrorCode::kDuplicateAlias:
    case ErrorCode::kDuplicateTeam:
    case ErrorCode::kDuplicateWorker:
    case ErrorCode::kInvalidState:
      return 409;
    default:
      return 500;
  }
}

json Service::error_body(const Error& e) {
  return {{"error", {{"code", error_code_name(e.code())}, {"detail", e.what()}}}};
}

}  // namespace tunegrid::service
