#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tunegrid::registry {

struct Application {
  std::string app_id;
  std::string name;
  std::string description;
  std::string worker_image_ref;  // opaque; stands in for a VM image
  std::string registered_by;

  bool operator==(const Application&) const = default;
};

struct Attachment {
  std::string app_id;
  std::string team_id;
  std::string team_alias;

  bool operator==(const Attachment&) const = default;
};

struct Group {
  std::string group_id;
  std::string owner;
  std::set<std::string> members;
  std::vector<Attachment> attachments;

  bool operator==(const Group&) const = default;
};

/// Everything a worker process needs to HELLO the manager under the right team.
struct LaunchContext {
  std::string app_id;
  std::string team_id;
  std::string team_alias;
  std::string manager_endpoint;  // host:port
  std::string worker_id;
  double capability_hint = 0.0;
  std::string owner;  // the launching user, credited with donor points

  bool operator==(const LaunchContext&) const = default;
};

struct State {
  std::set<std::string> users;
  std::map<std::string, Application> apps;
  std::map<std::string, Group> groups;
  std::uint64_t next_app = 1;
  std::uint64_t next_group = 1;
  std::uint64_t next_worker = 1;

  bool operator==(const State&) const = default;
};

struct RegistryOptions {
  std::string manager_endpoint = "127.0.0.1:7700";
  double capability_hint = 10000.0;
  /// Store file; empty keeps the registry in memory only.
  std::filesystem::path store;
};

/**
 * Application catalog, groups with team attachments, and worker launch.
 *
 * Users are name-only principals. Mutations are serialized and each one
 * replaces the published State; readers take the current snapshot. With a
 * store configured, every mutation is written to a temporary file and
 * renamed over the store before it becomes visible.
 */
class Registry {
 public:
  explicit Registry(RegistryOptions options = {});

  /// Throws kInvalidArgument (empty name) / kDuplicateName.
  std::string register_app(const std::string& user, const std::string& name, const std::string& description,
                           const std::string& worker_image_ref);

  /// The creator becomes owner and sole member.
  std::string create_group(const std::string& user);

  /// Idempotent. Throws kUnknownGroup.
  void join_group(const std::string& user, const std::string& group_id);

  /// Throws kUnknownGroup / kNotOwner / kUnknownApp / kDuplicateAlias / kDuplicateTeam.
  void attach_app(const std::string& user, const std::string& group_id, const std::string& app_id,
                  const std::string& team_id, const std::string& team_alias);

  /// Throws kUnknownGroup / kNotMember / kUnknownAlias.
  LaunchContext launch_worker(const std::string& user, const std::string& group_id, const std::string& team_alias);

  std::shared_ptr<const State> snapshot() const;

  /// Every team_id attached anywhere.
  std::set<std::string> team_ids() const;

  const RegistryOptions& options() const { return options_; }

 private:
  template <typename Fn>
  auto mutate(Fn&& fn);

  RegistryOptions options_;
  std::mutex write_mu_;
  mutable std::mutex read_mu_;
  std::shared_ptr<const State> state_;
};

/// Store document: {"format": "tunegrid-registry", "version": 1, ...}.
nlohmann::json to_store(const State& s);
State from_store(const nlohmann::json& j);

State load_store(const std::filesystem::path& path);
void save_store(const std::filesystem::path& path, const State& s);

void to_json(nlohmann::json& j, const Application& a);
void to_json(nlohmann::json& j, const Attachment& a);
void to_json(nlohmann::json& j, const Group& g);
void to_json(nlohmann::json& j, const LaunchContext& c);
void from_json(const nlohmann::json& j, LaunchContext& c);

}  // namespace tunegrid::registry
