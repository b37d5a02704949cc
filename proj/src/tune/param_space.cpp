#include "tunegrid/tune/param_space.hpp"

#include <cmath>
#include <set>

#include "tunegrid/error.hpp"

namespace tunegrid::tune {

ParamSpace::ParamSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw Error(ErrorCode::kConfig, "parameter space needs at least one dim");
  std::set<std::string> names;
  for (const Dimension& d : dims_) {
    if (d.name.empty()) throw Error(ErrorCode::kConfig, "parameter dim with empty name");
    if (!names.insert(d.name).second) throw Error(ErrorCode::kConfig, "duplicate parameter dim '" + d.name + "'");
    if (!std::isfinite(d.min) || !std::isfinite(d.max) || !(d.min < d.max)) {
      throw Error(ErrorCode::kConfig, "parameter dim '" + d.name + "': min must be below max");
    }
  }
}

bool ParamSpace::contains(const TuneParameters& p) const {
  if (p.values.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const double v = p.values[i];
    if (!(v >= dims_[i].min && v <= dims_[i].max)) return false;
  }
  return true;
}

void ParamSpace::check(const TuneParameters& p) const {
  if (p.values.size() != dims_.size()) {
    throw Error(ErrorCode::kOutOfSpace, "expected " + std::to_string(dims_.size()) + " parameter values, got " +
                                            std::to_string(p.values.size()));
  }
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const double v = p.values[i];
    const Dimension& d = dims_[i];
    if (!(v >= d.min && v <= d.max)) {
      throw Error(ErrorCode::kOutOfSpace, "parameter '" + d.name + "' = " + std::to_string(v) + " outside [" +
                                              std::to_string(d.min) + ", " + std::to_string(d.max) + "]");
    }
  }
}

std::vector<double> ParamSpace::normalize(const TuneParameters& p) const {
  std::vector<double> out(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    out[i] = (p.values[i] - dims_[i].min) / (dims_[i].max - dims_[i].min);
  }
  return out;
}

double ParamSpace::distance(const TuneParameters& a, const TuneParameters& b) const {
  const auto na = normalize(a);
  const auto nb = normalize(b);
  double sq = 0.0;
  for (std::size_t i = 0; i < na.size(); ++i) sq += (na[i] - nb[i]) * (na[i] - nb[i]);
  return std::sqrt(sq);
}

TuneParameters ParamSpace::center() const {
  TuneParameters p;
  for (const Dimension& d : dims_) p.values.push_back(0.5 * (d.min + d.max));
  return p;
}

void to_json(nlohmann::json& j, const Dimension& d) { j = nlohmann::json{{"name", d.name}, {"min", d.min}, {"max", d.max}}; }

void from_json(const nlohmann::json& j, Dimension& d) {
  j.at("name").get_to(d.name);
  j.at("min").get_to(d.min);
  j.at("max").get_to(d.max);
}

void to_json(nlohmann::json& j, const ParamSpace& s) { j = s.dims(); }

void from_json(const nlohmann::json& j, ParamSpace& s) { s = ParamSpace(j.get<std::vector<Dimension>>()); }

}  // namespace tunegrid::tune
