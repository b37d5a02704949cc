#include "tunegrid/tune/interpolation_cache.hpp"

#include <algorithm>
#include <cmath>

#include "tunegrid/error.hpp"

namespace tunegrid::tune {

InterpolationCache::InterpolationCache(ParamSpace space, std::size_t max_samples)
    : space_(std::move(space)), max_samples_(max_samples) {
  if (max_samples_ == 0) throw Error(ErrorCode::kInvalidArgument, "interpolation cache needs capacity >= 1");
}

bool InterpolationCache::same_point(const std::vector<double>& a, const std::vector<double>& b) const {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > kSamePointTolerance) return false;
  }
  return true;
}

void InterpolationCache::add_sample(const TuneParameters& params, histo::HistogramSet result) {
  space_.check(params);
  result.validate();
  if (result.n_events == 0) throw Error(ErrorCode::kInvalidArgument, "cache sample has no events");
  if (!samples_.empty() && !histo::same_schema(samples_.front().result, result)) {
    throw Error(ErrorCode::kSchemaMismatch, "cache sample schema differs from existing samples");
  }
  const auto key = space_.normalize(params);
  for (Sample& s : samples_) {
    if (same_point(space_.normalize(s.params), key)) {
      s.result = std::move(result);
      return;
    }
  }
  samples_.push_back(Sample{params, std::move(result), next_sequence_++});
  while (samples_.size() > max_samples_) samples_.pop_front();
}

Estimate InterpolationCache::estimate(const TuneParameters& params) const {
  if (samples_.empty()) throw Error(ErrorCode::kEmptyCache, "no completed tunes to interpolate from");
  space_.check(params);
  const auto query = space_.normalize(params);

  struct Weighted {
    std::vector<double> coords;
    const Sample* sample;
    double weight;
  };
  std::vector<Weighted> terms;
  terms.reserve(samples_.size());
  double nearest = INFINITY;
  for (const Sample& s : samples_) {
    auto coords = space_.normalize(s.params);
    if (same_point(coords, query)) return Estimate{s.result, 1.0};
    double sq = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) sq += (coords[i] - query[i]) * (coords[i] - query[i]);
    nearest = std::min(nearest, std::sqrt(sq));
    terms.push_back(Weighted{std::move(coords), &s, 1.0 / sq});
  }
  // Sum in a canonical order so the result does not depend on insertion order.
  std::sort(terms.begin(), terms.end(), [](const Weighted& a, const Weighted& b) { return a.coords < b.coords; });

  double weight_total = 0.0;
  double events_total = 0.0;
  for (const Weighted& t : terms) {
    weight_total += t.weight;
    events_total += static_cast<double>(t.sample->result.n_events);
  }
  const auto nominal = static_cast<std::uint64_t>(std::llround(events_total / static_cast<double>(terms.size())));

  Estimate out;
  out.quality = 1.0 / (1.0 + nearest);
  out.histograms = histo::empty_like(samples_.front().result, params);
  out.histograms.n_events = nominal;
  for (auto& [id, h] : out.histograms.histograms) {
    h.n_events = nominal;
    std::vector<double> per_event(h.counts.size(), 0.0);
    for (const Weighted& t : terms) {
      const histo::Histogram& src = t.sample->result.histograms.at(id);
      const double scale = t.weight / static_cast<double>(src.n_events);
      for (std::size_t i = 0; i < per_event.size(); ++i) per_event[i] += scale * src.counts[i];
    }
    for (std::size_t i = 0; i < per_event.size(); ++i) {
      h.counts[i] = per_event[i] / weight_total * static_cast<double>(nominal);
    }
  }
  return out;
}

std::vector<Neighbour> InterpolationCache::nearest(const TuneParameters& params, std::size_t k) const {
  if (samples_.empty()) throw Error(ErrorCode::kEmptyCache, "no completed tunes");
  space_.check(params);
  std::vector<Neighbour> all;
  all.reserve(samples_.size());
  for (const Sample& s : samples_) all.push_back(Neighbour{&s, space_.distance(s.params, params)});
  std::stable_sort(all.begin(), all.end(),
                   [](const Neighbour& a, const Neighbour& b) { return a.distance < b.distance; });
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace tunegrid::tune
