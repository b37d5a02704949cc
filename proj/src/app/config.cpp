#include "tunegrid/app/config.hpp"

#include <fstream>
#include <set>

#include "tunegrid/error.hpp"
#include "tunegrid/histo/json.hpp"

namespace tunegrid::app {
namespace {

using nlohmann::json;

const std::set<std::string> kSections{"model", "truth", "jobs", "listen", "registry", "ui", "teams"};
const std::set<std::string> kJobKeys{"target_events",  "chunk_events", "heartbeat_interval_ms",
                                     "heartbeat_timeout_intervals", "cache_max_samples", "seed",
                                     "donor_events_per_point"};

template <typename T>
void read(const json& section, const char* key, T& out) {
  if (section.contains(key)) section.at(key).get_to(out);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) throw Error(ErrorCode::kConfig, "endpoint '" + text + "' is not host:port");
  Endpoint e;
  e.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    e.port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, "endpoint '" + text + "' has no numeric port");
  }
  if (e.port < 0 || e.port > 65535) throw Error(ErrorCode::kConfig, "endpoint '" + text + "' port out of range");
  return e;
}

tune::TuneParameters default_truth() { return {{1.625, 0.5, 3.875, 0.25}}; }

tune::TuneParameters parse_params(const tune::ParamSpace& space, const json& j) {
  tune::TuneParameters p;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number()) throw Error(ErrorCode::kConfig, "parameter values must be numbers");
      p.values.push_back(v.get<double>());
    }
  } else if (j.is_object()) {
    for (const auto& d : space.dims()) {
      if (!j.contains(d.name) || !j.at(d.name).is_number()) {
        throw Error(ErrorCode::kConfig, "parameter '" + d.name + "' missing or not a number");
      }
      p.values.push_back(j.at(d.name).get<double>());
    }
    if (j.size() != space.dims().size()) throw Error(ErrorCode::kConfig, "unknown parameter names");
  } else {
    throw Error(ErrorCode::kConfig, "parameters must be an array or an object");
  }
  try {
    space.check(p);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return p;
}

ServerConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::kConfig, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kSections.contains(key)) throw Error(ErrorCode::kConfig, "unknown config section '" + key + "'");
  }
  ServerConfig c;
  try {
    if (doc.contains("model")) {
      c.model = doc.at("model").get<gen::GeneratorModel>();
      // A custom model has no meaningful default truth.
      if (!doc.contains("truth")) throw Error(ErrorCode::kConfig, "a custom model needs a 'truth'");
    }
    if (doc.contains("truth")) c.truth = parse_params(c.model.space(), doc.at("truth"));

    if (doc.contains("jobs")) {
      const json& j = doc.at("jobs");
      for (const auto& [key, value] : j.items()) {
        if (!kJobKeys.contains(key)) throw Error(ErrorCode::kConfig, "unknown jobs setting '" + key + "'");
      }
      read(j, "target_events", c.jobs.target_events);
      read(j, "chunk_events", c.jobs.chunk_events);
      read(j, "heartbeat_interval_ms", c.jobs.heartbeat_interval_ms);
      read(j, "heartbeat_timeout_intervals", c.jobs.heartbeat_timeout_intervals);
      read(j, "cache_max_samples", c.jobs.cache_max_samples);
      read(j, "seed", c.jobs.seed);
      read(j, "donor_events_per_point", c.jobs.donor_events_per_point);
    }
    if (doc.contains("listen")) {
      const json& l = doc.at("listen");
      if (l.contains("http")) c.http = parse_endpoint(l.at("http").get<std::string>());
      if (l.contains("workers")) c.workers = parse_endpoint(l.at("workers").get<std::string>());
    }
    if (doc.contains("registry")) {
      const json& r = doc.at("registry");
      c.registry_store = resolve(base_dir, r.value("store", ""));
      if (r.contains("advertised_endpoint")) {
        c.advertised_endpoint = parse_endpoint(r.at("advertised_endpoint").get<std::string>()).str();
      }
    }
    if (doc.contains("ui")) c.static_dir = resolve(base_dir, doc.at("ui").value("static_dir", ""));
    read(doc, "teams", c.teams);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad config value: ") + e.what());
  }

  if (c.jobs.target_events == 0) throw Error(ErrorCode::kConfig, "jobs.target_events must be positive");
  if (c.jobs.chunk_events == 0) throw Error(ErrorCode::kConfig, "jobs.chunk_events must be positive");
  if (c.jobs.heartbeat_interval_ms <= 0) throw Error(ErrorCode::kConfig, "jobs.heartbeat_interval_ms must be positive");
  if (c.jobs.heartbeat_timeout_intervals < 1) {
    throw Error(ErrorCode::kConfig, "jobs.heartbeat_timeout_intervals must be at least 1");
  }
  if (c.jobs.cache_max_samples == 0) throw Error(ErrorCode::kConfig, "jobs.cache_max_samples must be positive");
  if (c.jobs.donor_events_per_point == 0) throw Error(ErrorCode::kConfig, "jobs.donor_events_per_point must be positive");
  for (const auto& t : c.teams) {
    if (t.empty()) throw Error(ErrorCode::kConfig, "team ids must not be empty");
  }
  return c;
}

ServerConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace tunegrid::app
