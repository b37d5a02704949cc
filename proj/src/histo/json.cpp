#include "tunegrid/histo/json.hpp"

#include "tunegrid/error.hpp"

namespace tunegrid::tune {

void to_json(nlohmann::json& j, const TuneParameters& p) { j = p.values; }

void from_json(const nlohmann::json& j, TuneParameters& p) { p.values = j.get<std::vector<double>>(); }

}  // namespace tunegrid::tune

namespace tunegrid::histo {

void to_json(nlohmann::json& j, const Histogram& h) {
  j = nlohmann::json{{"observable", h.observable}, {"edges", h.edges}, {"counts", h.counts}, {"n_events", h.n_events}};
}

void from_json(const nlohmann::json& j, Histogram& h) {
  j.at("observable").get_to(h.observable);
  j.at("edges").get_to(h.edges);
  j.at("counts").get_to(h.counts);
  j.at("n_events").get_to(h.n_events);
  h.validate();
}

void to_json(nlohmann::json& j, const HistogramSet& s) {
  auto hs = nlohmann::json::array();
  for (const auto& [id, h] : s.histograms) hs.push_back(h);
  j = nlohmann::json{{"params", s.params}, {"n_events", s.n_events}, {"histograms", std::move(hs)}};
}

void from_json(const nlohmann::json& j, HistogramSet& s) {
  s = HistogramSet{};
  j.at("params").get_to(s.params);
  j.at("n_events").get_to(s.n_events);
  for (const auto& item : j.at("histograms")) {
    auto h = item.get<Histogram>();
    std::string id = h.observable;
    if (!s.histograms.emplace(std::move(id), std::move(h)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate observable in histogram set");
    }
  }
  s.validate();
}

void to_json(nlohmann::json& j, const ReferenceHistogram& r) {
  j = nlohmann::json{{"observable", r.observable}, {"edges", r.edges}, {"probabilities", r.probabilities}};
}

void from_json(const nlohmann::json& j, ReferenceHistogram& r) {
  j.at("observable").get_to(r.observable);
  j.at("edges").get_to(r.edges);
  j.at("probabilities").get_to(r.probabilities);
  r.validate();
}

void to_json(nlohmann::json& j, const FitScore& f) {
  j = nlohmann::json{{"chi2", f.chi2}, {"ndf", f.ndf}, {"reduced", f.reduced}};
}

void from_json(const nlohmann::json& j, FitScore& f) {
  j.at("chi2").get_to(f.chi2);
  j.at("ndf").get_to(f.ndf);
  j.at("reduced").get_to(f.reduced);
}

}  // namespace tunegrid::histo
