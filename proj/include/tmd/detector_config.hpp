#pragma once

#include <vector>

namespace tmd {

/// Physical description of an m-stage fiber-loop click detector: each stage
/// splits a pulse between a short arm and a long arm whose delay doubles
/// stage to stage, and two binary detectors watch the final coupler outputs.
/// A device with `stages` = m spreads one pulse over 2^(m+1) temporal modes.
struct DetectorConfig {
  int stages = 1;
  /// Per-stage probability of taking the short (undelayed) arm. Empty means
  /// balanced couplers (0.5 everywhere); otherwise size must equal `stages`.
  std::vector<double> coupler_ratios;
  /// Power transmission f of one base-length delay fiber, in (0, 1].
  double fiber_transmission = 1.0;
  /// Binary detector efficiency, in [0, 1].
  double detector_efficiency = 1.0;
  /// Delay added by one base fiber length.
  double base_delay_ns = 125.0;
  /// Detector recovery time after a click.
  double deadtime_ns = 60.0;

  /// Throws validation_error naming the first offending field.
  void validate() const;

  /// True when modes arrive faster than the detectors can recover. Not an
  /// error: such a device is buildable, just blind to back-to-back modes.
  bool deadtime_violation() const { return base_delay_ns <= deadtime_ns; }

  /// Short-arm probability for stage s, honoring the empty default.
  double ratio(int s) const;

  int mode_count() const { return 2 << stages; }  // 2^(stages+1)
};

}  // namespace tmd
