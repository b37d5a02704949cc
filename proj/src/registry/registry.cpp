#include "tunegrid/registry/registry.hpp"

#include <fstream>

#include "tunegrid/error.hpp"

namespace tunegrid::registry {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "tunegrid-registry";
constexpr int kStoreVersion = 1;

void require_user(const std::string& user) {
  if (user.empty()) throw Error(ErrorCode::kInvalidArgument, "user name must not be empty");
}

const Group& find_group(const State& s, const std::string& group_id) {
  auto it = s.groups.find(group_id);
  if (it == s.groups.end()) throw Error(ErrorCode::kUnknownGroup, "unknown group '" + group_id + "'");
  return it->second;
}

}  // namespace

Registry::Registry(RegistryOptions options) : options_(std::move(options)) {
  if (!options_.store.empty() && std::filesystem::exists(options_.store)) {
    state_ = std::make_shared<const State>(load_store(options_.store));
  } else {
    state_ = std::make_shared<const State>();
  }
}

std::shared_ptr<const State> Registry::snapshot() const {
  std::lock_guard lock(read_mu_);
  return state_;
}

template <typename Fn>
auto Registry::mutate(Fn&& fn) {
  std::lock_guard writer(write_mu_);
  auto next = std::make_shared<State>(*snapshot());
  auto result = fn(*next);
  if (!options_.store.empty()) save_store(options_.store, *next);
  std::lock_guard lock(read_mu_);
  state_ = std::move(next);
  return result;
}

std::string Registry::register_app(const std::string& user, const std::string& name, const std::string& description,
                                   const std::string& worker_image_ref) {
  require_user(user);
  if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "application name must not be empty");
  return mutate([&](State& s) {
    for (const auto& [id, app] : s.apps) {
      if (app.name == name) throw Error(ErrorCode::kDuplicateName, "application '" + name + "' already exists");
    }
    s.users.insert(user);
    const std::string id = "app-" + std::to_string(s.next_app++);
    s.apps.emplace(id, Application{id, name, description, worker_image_ref, user});
    return id;
  });
}

std::string Registry::create_group(const std::string& user) {
  require_user(user);
  return mutate([&](State& s) {
    s.users.insert(user);
    const std::string id = "group-" + std::to_string(s.next_group++);
    s.groups.emplace(id, Group{id, user, {user}, {}});
    return id;
  });
}

void Registry::join_group(const std::string& user, const std::string& group_id) {
  require_user(user);
  mutate([&](State& s) {
    find_group(s, group_id);
    s.users.insert(user);
    s.groups.at(group_id).members.insert(user);
    return 0;
  });
}

void Registry::attach_app(const std::string& user, const std::string& group_id, const std::string& app_id,
                          const std::string& team_id, const std::string& team_alias) {
  require_user(user);
  mutate([&](State& s) {
    const Group& g = find_group(s, group_id);
    if (g.owner != user) throw Error(ErrorCode::kNotOwner, user + " does not own " + group_id);
    if (!s.apps.contains(app_id)) throw Error(ErrorCode::kUnknownApp, "unknown application '" + app_id + "'");
    if (team_id.empty() || team_alias.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "team id and alias must not be empty");
    }
    for (const auto& a : g.attachments) {
      if (a.team_alias == team_alias) throw Error(ErrorCode::kDuplicateAlias, "alias '" + team_alias + "' in use");
      if (a.app_id == app_id && a.team_id == team_id) {
        throw Error(ErrorCode::kDuplicateTeam, app_id + " is already attached with team " + team_id);
      }
    }
    s.groups.at(group_id).attachments.push_back(Attachment{app_id, team_id, team_alias});
    return 0;
  });
}

LaunchContext Registry::launch_worker(const std::string& user, const std::string& group_id,
                                      const std::string& team_alias) {
  require_user(user);
  return mutate([&](State& s) {
    const Group& g = find_group(s, group_id);
    if (!g.members.contains(user)) throw Error(ErrorCode::kNotMember, user + " is not a member of " + group_id);
    for (const auto& a : g.attachments) {
      if (a.team_alias != team_alias) continue;
      LaunchContext ctx;
      ctx.app_id = a.app_id;
      ctx.team_id = a.team_id;
      ctx.team_alias = a.team_alias;
      ctx.manager_endpoint = options_.manager_endpoint;
      ctx.worker_id = "worker-" + std::to_string(s.next_worker++);
      ctx.capability_hint = options_.capability_hint;
      ctx.owner = user;
      return ctx;
    }
    throw Error(ErrorCode::kUnknownAlias, "no team alias '" + team_alias + "' in " + group_id);
  });
}

std::set<std::string> Registry::team_ids() const {
  std::set<std::string> out;
  for (const auto& [id, g] : snapshot()->groups) {
    for (const auto& a : g.attachments) out.insert(a.team_id);
  }
  return out;
}

void to_json(json& j, const Application& a) {
  j = {{"app_id", a.app_id},
       {"name", a.name},
       {"description", a.description},
       {"worker_image_ref", a.worker_image_ref},
       {"registered_by", a.registered_by}};
}

void to_json(json& j, const Attachment& a) {
  j = {{"app_id", a.app_id}, {"team_id", a.team_id}, {"team_alias", a.team_alias}};
}

void to_json(json& j, const Group& g) {
  j = {{"group_id", g.group_id}, {"owner", g.owner}, {"members", g.members}, {"attachments", g.attachments}};
}

void to_json(json& j, const LaunchContext& c) {
  j = {{"app_id", c.app_id},
       {"team_id", c.team_id},
       {"team_alias", c.team_alias},
       {"manager_endpoint", c.manager_endpoint},
       {"worker_id", c.worker_id},
       {"capability_hint", c.capability_hint},
       {"owner", c.owner}};
}

void from_json(const json& j, LaunchContext& c) {
  c.app_id = j.value("app_id", "");
  c.team_id = j.at("team_id").get<std::string>();
  c.team_alias = j.value("team_alias", "");
  c.manager_endpoint = j.at("manager_endpoint").get<std::string>();
  c.worker_id = j.at("worker_id").get<std::string>();
  c.capability_hint = j.value("capability_hint", 10000.0);
  c.owner = j.value("owner", "");
}

json to_store(const State& s) {
  json apps = json::array();
  for (const auto& [id, a] : s.apps) apps.push_back(a);
  json groups = json::array();
  for (const auto& [id, g] : s.groups) groups.push_back(g);
  return {{"format", kFormat},
          {"version", kStoreVersion},
          {"users", s.users},
          {"apps", apps},
          {"groups", groups},
          {"counters", {{"app", s.next_app}, {"group", s.next_group}, {"worker", s.next_worker}}}};
}

State from_store(const json& j) {
  try {
    if (j.at("format") != kFormat) throw Error(ErrorCode::kIo, "not a registry store");
    if (j.at("version") != kStoreVersion) {
      throw Error(ErrorCode::kIo, "unsupported registry store version " + j.at("version").dump());
    }
    State s;
    s.users = j.at("users").get<std::set<std::string>>();
    for (const auto& a : j.at("apps")) {
      Application app{a.at("app_id"), a.at("name"), a.at("description"), a.at("worker_image_ref"),
                      a.at("registered_by")};
      s.apps.emplace(app.app_id, std::move(app));
    }
    for (const auto& g : j.at("groups")) {
      Group group{g.at("group_id"), g.at("owner"), g.at("members").get<std::set<std::string>>(), {}};
      for (const auto& a : g.at("attachments")) {
        group.attachments.push_back(Attachment{a.at("app_id"), a.at("team_id"), a.at("team_alias")});
      }
      s.groups.emplace(group.group_id, std::move(group));
    }
    const json& c = j.at("counters");
    s.next_app = c.at("app");
    s.next_group = c.at("group");
    s.next_worker = c.at("worker");
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("corrupt registry store: ") + e.what());
  }
}

State load_store(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  try {
    return from_store(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

void save_store(const std::filesystem::path& path, const State& s) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << to_store(s).dump(2) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace tunegrid::registry
