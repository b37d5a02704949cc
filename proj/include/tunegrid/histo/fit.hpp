#pragma once

#include "tunegrid/histo/histogram.hpp"

namespace tunegrid::histo {

struct FitScore {
  double chi2 = 0.0;
  int ndf = 1;
  double reduced = 0.0;

  bool operator==(const FitScore&) const = default;
};

/**
 * Pearson chi-square of observed counts against exact bin probabilities.
 *
 *   chi2 = sum_{p_i > 0} (o_i - N p_i)^2 / (N p_i),  N = observed.n_events
 *
 * Zero-probability bins are left out of both the sum and ndf; ndf is the
 * number of included bins minus one. Throws kSchemaMismatch when edges or
 * observable differ, kInvalidArgument when N is zero, kDegenerateReference
 * when fewer than two bins carry probability.
 */
FitScore chi2_exact(const Histogram& observed, const ReferenceHistogram& reference);

/**
 * Two-sample chi-square with Poisson variances on both sides.
 *
 * The reference is scaled by k = N_o / N_r:
 *   chi2 = sum_{o_i + r_i > 0} (o_i - k r_i)^2 / (o_i + k^2 r_i)
 */
FitScore chi2_empirical(const Histogram& observed, const Histogram& reference);

/// Sums chi2 and ndf over every observable in `observed`. Throws kMissingReference.
FitScore fit_score_set(const HistogramSet& observed, const ReferenceSet& reference);

}  // namespace tunegrid::histo
