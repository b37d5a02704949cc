#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "tunegrid/histo/histogram.hpp"
#include "tunegrid/tune/param_space.hpp"

namespace tunegrid::tune {

struct Estimate {
  histo::HistogramSet histograms;
  /// 1.0 on an exact cache hit, 1 / (1 + d_nearest) otherwise. Display only.
  double quality = 0.0;
};

struct Sample {
  TuneParameters params;
  histo::HistogramSet result;
  std::uint64_t sequence = 0;  // insertion order, older first
};

struct Neighbour {
  const Sample* sample = nullptr;
  double distance = 0.0;
};

/**
 * Completed tunes kept for instant estimates at new parameter points.
 *
 * Estimates use Shepard inverse-distance weighting (power 2) over coordinates
 * normalized per dim, applied to per-event bin values and rescaled to the
 * mean sample n_events. Capacity is bounded; the oldest sample is evicted
 * first.
 */
class InterpolationCache {
 public:
  static constexpr std::size_t kDefaultMaxSamples = 1024;
  /// Normalized coordinates closer than this on every dim are the same point.
  static constexpr double kSamePointTolerance = 1e-12;

  explicit InterpolationCache(ParamSpace space, std::size_t max_samples = kDefaultMaxSamples);

  /// Replaces a sample at the same point; evicts the oldest when over capacity.
  void add_sample(const TuneParameters& params, histo::HistogramSet result);

  Estimate estimate(const TuneParameters& params) const;

  /// k closest samples by normalized distance, ties broken by insertion order.
  std::vector<Neighbour> nearest(const TuneParameters& params, std::size_t k) const;

  const ParamSpace& space() const { return space_; }
  const std::deque<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t max_samples() const { return max_samples_; }

 private:
  bool same_point(const std::vector<double>& a, const std::vector<double>& b) const;

  ParamSpace space_;
  std::size_t max_samples_;
  std::deque<Sample> samples_;
  std::uint64_t next_sequence_ = 0;
};

}  // namespace tunegrid::tune
