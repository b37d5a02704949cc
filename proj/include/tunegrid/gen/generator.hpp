#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tunegrid/histo/histogram.hpp"
#include "tunegrid/tune/param_space.hpp"

namespace tunegrid::gen {

/// One observable with density f(x; a, b) = b + (1 - b) a x^(a - 1) on [0, 1].
struct ObservableModel {
  std::string id;
  std::size_t shape_param = 0;  // index of `a` in the parameter vector
  std::size_t flat_param = 0;   // index of `b`
  std::vector<double> edges;

  bool operator==(const ObservableModel&) const = default;
};

/**
 * Toy Monte Carlo payload standing in for the physics generator.
 *
 * Every observable is sampled by inverse CDF: draw u1, u2; x = u2 when
 * u1 < b, else u2^(1/a). Expected bin probabilities follow in closed form
 * from F(x) = b x + (1 - b) x^a.
 */
class GeneratorModel {
 public:
  static constexpr double kShapeMin = 0.5;
  static constexpr double kShapeMax = 5.0;

  GeneratorModel() = default;
  /// Validates parameter indices and that the space bounds keep a in [0.5, 5] and b in [0, 1].
  GeneratorModel(tune::ParamSpace space, std::vector<ObservableModel> observables);

  /// Two observables x 2 params (4-dim space), 20 uniform bins each.
  static GeneratorModel default_model();

  const tune::ParamSpace& space() const { return space_; }
  const std::vector<ObservableModel>& observables() const { return observables_; }

  /// Zero-count histogram set with this model's schema.
  histo::HistogramSet empty_set(const tune::TuneParameters& params) const;

  bool operator==(const GeneratorModel&) const = default;

 private:
  tune::ParamSpace space_;
  std::vector<ObservableModel> observables_;
};

struct Seed {
  std::uint64_t value = 0;

  bool operator==(const Seed&) const = default;
};

/// job_seed + chunk_index with 64-bit wraparound.
constexpr Seed derive_chunk_seed(Seed job_seed, std::uint64_t chunk_index) {
  return Seed{job_seed.value + chunk_index};
}

struct ChunkOptions {
  /// Artificial slowness: milliseconds slept per 1000 events.
  double delay_ms_per_1000 = 0.0;
  /// Checked between batches of kInterruptBatch events.
  std::stop_token stop;
};

inline constexpr std::uint64_t kInterruptBatch = 1000;

/**
 * Samples n_events events per observable. Deterministic for a given
 * (seed, params, n_events). Returns nullopt when stopped before finishing.
 */
std::optional<histo::HistogramSet> generate_chunk(const GeneratorModel& model, const tune::TuneParameters& params,
                                                  std::uint64_t n_events, Seed seed, const ChunkOptions& options);

histo::HistogramSet generate_chunk(const GeneratorModel& model, const tune::TuneParameters& params,
                                   std::uint64_t n_events, Seed seed);

/// Exact bin probabilities b (u - l) + (1 - b) (u^a - l^a) per observable.
histo::ReferenceSet expected_reference(const GeneratorModel& model, const tune::TuneParameters& params);

/**
 * Raw event stream behind generate_chunk: calls sink(observable_index, x)
 * for every sampled value, in generation order.
 */
template <typename Sink>
void sample_events(const GeneratorModel& model, const tune::TuneParameters& params, std::uint64_t n_events, Seed seed,
                   Sink&& sink);

/// SplitMix64-seeded xoshiro256** stream; the event generator's PRNG.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_[4];
};

void to_json(nlohmann::json& j, const ObservableModel& o);
void from_json(const nlohmann::json& j, ObservableModel& o);
void to_json(nlohmann::json& j, const GeneratorModel& m);
void from_json(const nlohmann::json& j, GeneratorModel& m);

// -- implementation ---------------------------------------------------------

namespace detail {
inline double draw(Rng& rng, double shape, double flat) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return u1 < flat ? u2 : std::pow(u2, 1.0 / shape);
}
}  // namespace detail

template <typename Sink>
void sample_events(const GeneratorModel& model, const tune::TuneParameters& params, std::uint64_t n_events, Seed seed,
                   Sink&& sink) {
  model.space().check(params);
  Rng rng(seed.value);
  const auto& obs = model.observables();
  for (std::uint64_t e = 0; e < n_events; ++e) {
    for (std::size_t o = 0; o < obs.size(); ++o) {
      sink(o, detail::draw(rng, params.values[obs[o].shape_param], params.values[obs[o].flat_param]));
    }
  }
}

}  // namespace tunegrid::gen
