#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tunegrid/tune/params.hpp"

namespace tunegrid::tune {

struct Dimension {
  std::string name;
  double min = 0.0;
  double max = 1.0;

  bool operator==(const Dimension&) const = default;
};

class ParamSpace {
 public:
  ParamSpace() = default;
  /// Throws Error(kConfig) unless names are unique, min < max, and there is at least one dim.
  explicit ParamSpace(std::vector<Dimension> dims);

  const std::vector<Dimension>& dims() const { return dims_; }
  std::size_t size() const { return dims_.size(); }

  bool contains(const TuneParameters& p) const;

  /// Throws Error(kOutOfSpace) naming the first offending dim.
  void check(const TuneParameters& p) const;

  /// Maps each coordinate to [0, 1] along its dim.
  std::vector<double> normalize(const TuneParameters& p) const;

  /// Euclidean distance between normalized coordinates.
  double distance(const TuneParameters& a, const TuneParameters& b) const;

  TuneParameters center() const;

  bool operator==(const ParamSpace&) const = default;

 private:
  std::vector<Dimension> dims_;
};

void to_json(nlohmann::json& j, const Dimension& d);
void from_json(const nlohmann::json& j, Dimension& d);
void to_json(nlohmann::json& j, const ParamSpace& s);
void from_json(const nlohmann::json& j, ParamSpace& s);

}  // namespace tunegrid::tune
