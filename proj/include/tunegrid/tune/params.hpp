#pragma once

#include <vector>

namespace tunegrid::tune {

// A point in a ParamSpace; values are ordered like the space's dims.
struct TuneParameters {
  std::vector<double> values;

  bool operator==(const TuneParameters&) const = default;
};

}  // namespace tunegrid::tune
