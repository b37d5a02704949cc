#include "tunegrid/gen/generator.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <thread>

#include "tunegrid/error.hpp"
#include "tunegrid/histo/json.hpp"

namespace tunegrid::gen {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

double cdf(double x, double shape, double flat) { return flat * x + (1.0 - flat) * std::pow(x, shape); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& s : s_) s = splitmix64(state);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

GeneratorModel::GeneratorModel(tune::ParamSpace space, std::vector<ObservableModel> observables)
    : space_(std::move(space)), observables_(std::move(observables)) {
  if (observables_.empty()) throw Error(ErrorCode::kConfig, "generator model needs at least one observable");
  std::set<std::string> ids;
  const auto& dims = space_.dims();
  for (const ObservableModel& o : observables_) {
    if (o.id.empty() || !ids.insert(o.id).second) {
      throw Error(ErrorCode::kConfig, "observable ids must be non-empty and unique");
    }
    if (o.shape_param >= dims.size() || o.flat_param >= dims.size()) {
      throw Error(ErrorCode::kConfig, "observable '" + o.id + "' references a missing parameter");
    }
    const auto& a = dims[o.shape_param];
    const auto& b = dims[o.flat_param];
    if (a.min < kShapeMin || a.max > kShapeMax) {
      throw Error(ErrorCode::kConfig, "parameter '" + a.name + "' must stay within [0.5, 5]");
    }
    if (b.min < 0.0 || b.max > 1.0) {
      throw Error(ErrorCode::kConfig, "parameter '" + b.name + "' must stay within [0, 1]");
    }
    try {
      histo::make_empty(o.id, o.edges).validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, e.what());
    }
    if (o.edges.front() < 0.0 || o.edges.back() > 1.0) {
      throw Error(ErrorCode::kConfig, "observable '" + o.id + "' edges must lie within [0, 1]");
    }
  }
}

GeneratorModel GeneratorModel::default_model() {
  tune::ParamSpace space({{"a1", 0.5, 5.0}, {"b1", 0.0, 1.0}, {"a2", 0.5, 5.0}, {"b2", 0.0, 1.0}});
  auto edges = histo::uniform_edges(20, 0.0, 1.0);
  return GeneratorModel(std::move(space), {{"obs1", 0, 1, edges}, {"obs2", 2, 3, edges}});
}

histo::HistogramSet GeneratorModel::empty_set(const tune::TuneParameters& params) const {
  histo::HistogramSet set;
  set.params = params;
  for (const ObservableModel& o : observables_) set.histograms.emplace(o.id, histo::make_empty(o.id, o.edges));
  return set;
}

std::optional<histo::HistogramSet> generate_chunk(const GeneratorModel& model, const tune::TuneParameters& params,
                                                  std::uint64_t n_events, Seed seed, const ChunkOptions& options) {
  model.space().check(params);
  histo::HistogramSet set = model.empty_set(params);
  const auto& obs = model.observables();
  std::vector<histo::Histogram*> targets;
  for (const auto& o : obs) targets.push_back(&set.histograms.at(o.id));

  Rng rng(seed.value);
  const auto delay = std::chrono::duration<double, std::milli>(options.delay_ms_per_1000);
  for (std::uint64_t e = 0; e < n_events; ++e) {
    if (e % kInterruptBatch == 0) {
      if (options.stop.stop_requested()) return std::nullopt;
      if (options.delay_ms_per_1000 > 0.0 && e > 0) std::this_thread::sleep_for(delay);
    }
    for (std::size_t o = 0; o < obs.size(); ++o) {
      const double x = detail::draw(rng, params.values[obs[o].shape_param], params.values[obs[o].flat_param]);
      const auto bin = targets[o]->find_bin(x);
      if (bin >= 0) targets[o]->counts[static_cast<std::size_t>(bin)] += 1.0;
    }
  }
  if (options.delay_ms_per_1000 > 0.0 && n_events > 0) {
    std::this_thread::sleep_for(delay * (static_cast<double>((n_events - 1) % kInterruptBatch + 1) / 1000.0));
  }
  if (options.stop.stop_requested()) return std::nullopt;
  set.n_events = n_events;
  for (auto* h : targets) h->n_events = n_events;
  return set;
}

histo::HistogramSet generate_chunk(const GeneratorModel& model, const tune::TuneParameters& params,
                                   std::uint64_t n_events, Seed seed) {
  return *generate_chunk(model, params, n_events, seed, ChunkOptions{});
}

histo::ReferenceSet expected_reference(const GeneratorModel& model, const tune::TuneParameters& params) {
  model.space().check(params);
  histo::ReferenceSet out;
  for (const ObservableModel& o : model.observables()) {
    const double a = params.values[o.shape_param];
    const double b = params.values[o.flat_param];
    histo::ReferenceHistogram ref;
    ref.observable = o.id;
    ref.edges = o.edges;
    ref.probabilities.resize(o.edges.size() - 1);
    for (std::size_t i = 0; i + 1 < o.edges.size(); ++i) {
      ref.probabilities[i] = cdf(o.edges[i + 1], a, b) - cdf(o.edges[i], a, b);
    }
    out.emplace(o.id, std::move(ref));
  }
  return out;
}

void to_json(nlohmann::json& j, const ObservableModel& o) {
  j = nlohmann::json{{"id", o.id}, {"shape_param", o.shape_param}, {"flat_param", o.flat_param}, {"edges", o.edges}};
}

void from_json(const nlohmann::json& j, ObservableModel& o) {
  j.at("id").get_to(o.id);
  j.at("shape_param").get_to(o.shape_param);
  j.at("flat_param").get_to(o.flat_param);
  j.at("edges").get_to(o.edges);
}

void to_json(nlohmann::json& j, const GeneratorModel& m) {
  j = nlohmann::json{{"space", m.space()}, {"observables", m.observables()}};
}

void from_json(const nlohmann::json& j, GeneratorModel& m) {
  m = GeneratorModel(j.at("space").get<tune::ParamSpace>(), j.at("observables").get<std::vector<ObservableModel>>());
}

}  // namespace tunegrid::gen
