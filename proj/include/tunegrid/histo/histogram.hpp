#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tunegrid/tune/params.hpp"

namespace tunegrid::histo {

/**
 * Binned counts for one observable.
 *
 * Counts are reals so merged and rescaled histograms stay closed under the
 * operations in this module. `n_events` includes events that fell outside
 * the binned range, so `sum(counts) <= n_events`.
 */
struct Histogram {
  std::string observable;
  std::vector<double> edges;
  std::vector<double> counts;
  std::uint64_t n_events = 0;

  std::size_t bin_count() const { return counts.size(); }
  double sum() const;

  /// Index of the bin containing x, or -1 when x is outside [edges.front(), edges.back()).
  std::ptrdiff_t find_bin(double x) const;

  /// Throws Error(kInvalidArgument) on any broken invariant.
  void validate() const;

  bool operator==(const Histogram&) const = default;
};

/// Empty histogram (all zero counts) over the given edges.
Histogram make_empty(std::string observable, std::vector<double> edges);

/// `n` uniform bins on [lo, hi].
std::vector<double> uniform_edges(std::size_t n, double lo, double hi);

/// Output of one simulation run (or a merge of runs) at one parameter point.
struct HistogramSet {
  std::map<std::string, Histogram> histograms;
  tune::TuneParameters params;
  std::uint64_t n_events = 0;

  void validate() const;

  bool operator==(const HistogramSet&) const = default;
};

/// True when both sets have the same observables with identical edges.
bool same_schema(const HistogramSet& a, const HistogramSet& b);

/// Zero-count copy of `schema` carrying `params`.
HistogramSet empty_like(const HistogramSet& schema, tune::TuneParameters params);

/**
 * Elementwise sum of partial results from the same parameter point.
 *
 * Throws kEmptyInput on an empty list and kSchemaMismatch if observables,
 * edges or params differ between partials.
 */
HistogramSet merge(std::span<const HistogramSet> partials);

/// Accumulates `chunk` into `acc` in place; same preconditions as merge().
void merge_into(HistogramSet& acc, const HistogramSet& chunk);

/// Expected bin probabilities for one observable. Mass outside the binned range is allowed.
struct ReferenceHistogram {
  std::string observable;
  std::vector<double> edges;
  std::vector<double> probabilities;

  void validate() const;

  bool operator==(const ReferenceHistogram&) const = default;
};

using ReferenceSet = std::map<std::string, ReferenceHistogram>;

}  // namespace tunegrid::histo
