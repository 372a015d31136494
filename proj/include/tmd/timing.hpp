#pragma once

#include "tmd/detector_config.hpp"

namespace tmd {

/// Repetition-rate budget of a device: the longest delay path is
/// (2^m - 1) base delays, and a new pulse may only enter once the previous
/// one has fully drained.
struct TimingReport {
  int stages = 0;
  double delta_t_ns = 0.0;
  double longest_path_ns = 0.0;
  double max_rep_rate_hz = 0.0;
  bool deadtime_violation = false;
};

TimingReport timing(const DetectorConfig& config);

}  // namespace tmd
