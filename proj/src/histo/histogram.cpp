#include "tunegrid/histo/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tunegrid/error.hpp"

namespace tunegrid::histo {
namespace {

// Merged and interpolated counts are sums of reals; allow rounding slack
// when checking sum(counts) <= n_events.
constexpr double kSumSlack = 1e-9;

void check_edges(const std::vector<double>& edges, const std::string& what) {
  if (edges.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, what + ": need at least two bin edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, what + ": bin edges must be strictly increasing");
    }
  }
}

}  // namespace

double Histogram::sum() const { return std::accumulate(counts.begin(), counts.end(), 0.0); }

std::ptrdiff_t Histogram::find_bin(double x) const {
  if (edges.empty() || !(x >= edges.front()) || !(x < edges.back())) return -1;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return std::distance(edges.begin(), it) - 1;
}

void Histogram::validate() const {
  const std::string what = "histogram '" + observable + "'";
  check_edges(edges, what);
  if (counts.size() + 1 != edges.size()) {
    throw Error(ErrorCode::kInvalidArgument, what + ": counts/edges length mismatch");
  }
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorCode::kInvalidArgument, what + ": counts must be finite and non-negative");
    }
  }
  const double n = static_cast<double>(n_events);
  if (sum() > n * (1.0 + kSumSlack) + kSumSlack) {
    throw Error(ErrorCode::kInvalidArgument, what + ": sum of counts exceeds n_events");
  }
}

Histogram make_empty(std::string observable, std::vector<double> edges) {
  Histogram h;
  h.observable = std::move(observable);
  h.counts.assign(edges.size() > 0 ? edges.size() - 1 : 0, 0.0);
  h.edges = std::move(edges);
  return h;
}

std::vector<double> uniform_edges(std::size_t n, double lo, double hi) {
  if (n == 0 || !(hi > lo)) {
    throw Error(ErrorCode::kInvalidArgument, "uniform_edges: need n >= 1 and hi > lo");
  }
  std::vector<double> edges(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
  }
  edges.back() = hi;
  return edges;
}

void HistogramSet::validate() const {
  for (const auto& [id, h] : histograms) {
    if (id != h.observable) {
      throw Error(ErrorCode::kInvalidArgument, "histogram set key '" + id + "' does not match observable");
    }
    if (h.n_events != n_events) {
      throw Error(ErrorCode::kInvalidArgument, "histogram '" + id + "' n_events differs from its set");
    }
    h.validate();
  }
}

bool same_schema(const HistogramSet& a, const HistogramSet& b) {
  if (a.histograms.size() != b.histograms.size()) return false;
  auto ia = a.histograms.begin();
  auto ib = b.histograms.begin();
  for (; ia != a.histograms.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.edges != ib->second.edges) return false;
  }
  return true;
}

HistogramSet empty_like(const HistogramSet& schema, tune::TuneParameters params) {
  HistogramSet out;
  out.params = std::move(params);
  for (const auto& [id, h] : schema.histograms) {
    out.histograms.emplace(id, make_empty(id, h.edges));
  }
  return out;
}

void merge_into(HistogramSet& acc, const HistogramSet& chunk) {
  if (!same_schema(acc, chunk)) {
    throw Error(ErrorCode::kSchemaMismatch, "merge: observables or bin edges differ");
  }
  if (acc.params != chunk.params) {
    throw Error(ErrorCode::kSchemaMismatch, "merge: partials come from different parameters");
  }
  for (auto& [id, h] : acc.histograms) {
    const Histogram& other = chunk.histograms.at(id);
    for (std::size_t i = 0; i < h.counts.size(); ++i) h.counts[i] += other.counts[i];
    h.n_events += other.n_events;
  }
  acc.n_events += chunk.n_events;
}

HistogramSet merge(std::span<const HistogramSet> partials) {
  if (partials.empty()) throw Error(ErrorCode::kEmptyInput, "merge: no partial results");
  HistogramSet out = partials.front();
  for (const HistogramSet& p : partials.subspan(1)) merge_into(out, p);
  return out;
}

void ReferenceHistogram::validate() const {
  const std::string what = "reference '" + observable + "'";
  check_edges(edges, what);
  if (probabilities.size() + 1 != edges.size()) {
    throw Error(ErrorCode::kInvalidArgument, what + ": probabilities/edges length mismatch");
  }
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw Error(ErrorCode::kInvalidArgument, what + ": negative probability");
    total += p;
  }
  if (total > 1.0 + 1e-9) throw Error(ErrorCode::kInvalidArgument, what + ": probabilities sum above 1");
}

}  // namespace tunegrid::histo
