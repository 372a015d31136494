#include "tmd/detector_config.hpp"

#include <string>

#include "tmd/errors.hpp"

namespace tmd {

void DetectorConfig::validate() const {
  if (stages < 1)
    throw validation_error("stages must be >= 1 (got " + std::to_string(stages) + ")");
  if (stages > 20) throw validation_error("stages must be <= 20");
  if (!coupler_ratios.empty() && static_cast<int>(coupler_ratios.size()) != stages)
    throw validation_error("coupler_ratios must have one entry per stage (expected " +
                           std::to_string(stages) + ", got " +
                           std::to_string(coupler_ratios.size()) + ")");
  for (double r : coupler_ratios)
    if (!(r >= 0.0 && r <= 1.0))
      throw validation_error("coupler_ratios entries must be in [0, 1]");
  if (!(fiber_transmission > 0.0 && fiber_transmission <= 1.0))
    throw validation_error("fiber_transmission must be in (0, 1]");
  if (!(detector_efficiency >= 0.0 && detector_efficiency <= 1.0))
    throw validation_error("detector_efficiency must be in [0, 1]");
  if (!(base_delay_ns > 0.0)) throw validation_error("base_delay_ns must be > 0");
  if (!(deadtime_ns >= 0.0)) throw validation_error("deadtime_ns must be >= 0");
}

double DetectorConfig::ratio(int s) const {
  return coupler_ratios.empty() ? 0.5 : coupler_ratios[static_cast<std::size_t>(s)];
}

}  // namespace tmd
