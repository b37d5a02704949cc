#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "tunegrid/error.hpp"
#include "tunegrid/gen/generator.hpp"
#include "tunegrid/jobs/manager_loop.hpp"
#include "tunegrid/registry/registry.hpp"

namespace tunegrid::service {

using nlohmann::json;

/**
 * Player and UI facing API, independent of HTTP. Requests and responses are
 * JSON documents; failures are tunegrid::Error values that the HTTP layer
 * maps to status codes. All writes go through the manager loop or the
 * registry, reads come from their published snapshots.
 */
class Service {
 public:
  Service(jobs::ManagerLoop& loop, registry::Registry& registry, gen::GeneratorModel model,
          histo::ReferenceSet reference);

  json list_apps() const;
  /// {"user", "name", "description", "worker_image_ref"}
  json register_app(const json& body);

  json list_groups() const;
  /// {"user"}
  json create_group(const json& body);
  /// {"user"}
  json join_group(const std::string& group_id, const json& body);
  /// {"user", "app_id", "team_id", "team_alias"}; the team becomes available for tunes.
  json attach_app(const std::string& group_id, const json& body);
  /// {"user", "team_alias"} -> LaunchContext
  json launch_worker(const std::string& group_id, const json& body);

  /// {"player", "team", "params"} with params as an array or a name -> value object.
  json submit(const json& body);
  json list_jobs() const;
  /// Polling view: the job record plus its latest progress event.
  json job(const std::string& job_id) const;
  json cancel(const std::string& job_id);
  /// Throws kUnknownJob. With `from_start` the job's whole event history is replayed first.
  std::shared_ptr<jobs::Subscription> stream(const std::string& job_id, bool from_start = false);

  json status() const;
  json leaderboard() const;
  /// Parameter space, observables and the reference data players tune against.
  json space() const;

  /// Adds every registry team to the manager.
  void sync_teams();

  static int http_status(ErrorCode code);
  static json error_body(const Error& e);

 private:
  tune::TuneParameters parse_params(const json& params) const;

  jobs::ManagerLoop& loop_;
  registry::Registry& registry_;
  gen::GeneratorModel model_;
  histo::ReferenceSet reference_;
};

}  // namespace tunegrid::service
