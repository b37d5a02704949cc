#include "tunegrid/histo/fit.hpp"

#include "tunegrid/error.hpp"

namespace tunegrid::histo {
namespace {

FitScore make_score(double chi2, std::size_t included, const std::string& observable) {
  if (included < 2) {
    throw Error(ErrorCode::kDegenerateReference,
                "'" + observable + "': fewer than two bins contribute to chi2");
  }
  FitScore s;
  s.chi2 = chi2;
  s.ndf = static_cast<int>(included) - 1;
  s.reduced = chi2 / s.ndf;
  return s;
}

}  // namespace

FitScore chi2_exact(const Histogram& observed, const ReferenceHistogram& reference) {
  if (observed.observable != reference.observable || observed.edges != reference.edges ||
      observed.counts.size() != reference.probabilities.size()) {
    throw Error(ErrorCode::kSchemaMismatch,
                "chi2: '" + observed.observable + "' does not match reference '" + reference.observable + "'");
  }
  if (observed.n_events == 0) {
    throw Error(ErrorCode::kInvalidArgument, "chi2: observed histogram has no events");
  }
  const double n = static_cast<double>(observed.n_events);
  double chi2 = 0.0;
  std::size_t included = 0;
  for (std::size_t i = 0; i < observed.counts.size(); ++i) {
    const double p = reference.probabilities[i];
    if (p <= 0.0) continue;
    const double expected = n * p;
    const double diff = observed.counts[i] - expected;
    chi2 += diff * diff / expected;
    ++included;
  }
  return make_score(chi2, included, observed.observable);
}

FitScore chi2_empirical(const Histogram& observed, const Histogram& reference) {
  if (observed.edges != reference.edges || observed.counts.size() != reference.counts.size()) {
    throw Error(ErrorCode::kSchemaMismatch, "chi2: bin edges differ for '" + observed.observable + "'");
  }
  if (observed.n_events == 0 || reference.n_events == 0) {
    throw Error(ErrorCode::kInvalidArgument, "chi2: both histograms need events");
  }
  const double k = static_cast<double>(observed.n_events) / static_cast<double>(reference.n_events);
  double chi2 = 0.0;
  std::size_t included = 0;
  for (std::size_t i = 0; i < observed.counts.size(); ++i) {
    const double o = observed.counts[i];
    const double r = reference.counts[i];
    if (o + r <= 0.0) continue;
    const double diff = o - k * r;
    chi2 += diff * diff / (o + k * k * r);
    ++included;
  }
  return make_score(chi2, included, observed.observable);
}

FitScore fit_score_set(const HistogramSet& observed, const ReferenceSet& reference) {
  FitScore total;
  total.chi2 = 0.0;
  total.ndf = 0;
  for (const auto& [id, h] : observed.histograms) {
    auto it = reference.find(id);
    if (it == reference.end()) {
      throw Error(ErrorCode::kMissingReference, "no reference histogram for '" + id + "'");
    }
    const FitScore s = chi2_exact(h, it->second);
    total.chi2 += s.chi2;
    total.ndf += s.ndf;
  }
  if (total.ndf == 0) throw Error(ErrorCode::kEmptyInput, "fit: histogram set has no observables");
  total.reduced = total.chi2 / total.ndf;
  return total;
}

}  // namespace tunegrid::histo
