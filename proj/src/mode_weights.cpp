#include "tmd/mode_weights.hpp"

#include <cmath>
#include <string>

#include "tmd/errors.hpp"

namespace tmd {

double ModeWeights::efficiency() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

ModeWeights ModeWeights::normalized() const {
  const double s = efficiency();
  if (!(s > 0.0)) throw validation_error("cannot normalize all-zero mode weights");
  ModeWeights out;
  out.weights.reserve(weights.size());
  for (double w : weights) out.weights.push_back(w / s);
  out.loss_fraction = 0.0;
  return out;
}

void ModeWeights::validate() const {
  if (weights.empty()) throw validation_error("mode weights must not be empty");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw validation_error("mode weights must be finite and >= 0");
  if (efficiency() > 1.0 + 1e-12)
    throw validation_error("mode weights must sum to at most 1 (got " +
                           std::to_string(efficiency()) + ")");
}

ModeWeights derive_mode_weights(const DetectorConfig& config) {
  config.validate();
  const int m = config.stages;
  const int paths = 1 << m;

  ModeWeights out;
  out.weights.assign(static_cast<std::size_t>(2 * paths), 0.0);

  // Path index bit s set = long arm taken at stage s; the temporal slot is
  // the total delay in base units, which is the path index itself.
  for (int path = 0; path < paths; ++path) {
    double prob = 1.0;
    for (int s = 0; s < m; ++s) {
      const double r = config.ratio(s);
      if (path & (1 << s))
        prob *= (1.0 - r) * std::pow(config.fiber_transmission, static_cast<double>(1 << s));
      else
        prob *= r;
    }
    // Final coupler splits every path evenly over the two detector outputs.
    const double w = 0.5 * prob * config.detector_efficiency;
    out.weights[static_cast<std::size_t>(2 * path)] = w;
    out.weights[static_cast<std::size_t>(2 * path + 1)] = w;
  }

  out.loss_fraction = 1.0 - out.efficiency();
  return out;
}

}  // namespace tmd
