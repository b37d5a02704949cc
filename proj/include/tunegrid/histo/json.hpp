#pragma once

#include <nlohmann/json.hpp>

#include "tunegrid/histo/fit.hpp"
#include "tunegrid/histo/histogram.hpp"

// Document encodings shared by the wire protocol, the HTTP API and reports.
// Histogram: {"observable", "edges", "counts", "n_events"}.
// HistogramSet: {"params": [...], "n_events", "histograms": [Histogram...]}.

namespace tunegrid::tune {
void to_json(nlohmann::json& j, const TuneParameters& p);
void from_json(const nlohmann::json& j, TuneParameters& p);
}  // namespace tunegrid::tune

namespace tunegrid::histo {
void to_json(nlohmann::json& j, const Histogram& h);
void from_json(const nlohmann::json& j, Histogram& h);
void to_json(nlohmann::json& j, const HistogramSet& s);
void from_json(const nlohmann::json& j, HistogramSet& s);
void to_json(nlohmann::json& j, const ReferenceHistogram& r);
void from_json(const nlohmann::json& j, ReferenceHistogram& r);
void to_json(nlohmann::json& j, const FitScore& f);
void from_json(const nlohmann::json& j, FitScore& f);
}  // namespace tunegrid::histo
