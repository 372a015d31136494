#pragma once

#include <cstddef>
#include <vector>

#include "tmd/detector_config.hpp"

namespace tmd {

/// Per-mode probabilities P_i that a single photon ends up in temporal mode
/// i. The sum is the total device efficiency; 1 - sum is mass lost to fiber
/// absorption, virtual loss modes and detector inefficiency.
struct ModeWeights {
  std::vector<double> weights;
  double loss_fraction = 0.0;

  std::size_t mode_count() const { return weights.size(); }
  double efficiency() const;  // sum of weights

  /// Same shape scaled so the weights sum to exactly 1 (lossless convention
  /// expected by conditional_matrix). Throws if all weights are zero.
  ModeWeights normalized() const;

  /// Checks weights >= 0 and sum <= 1 + 1e-12; throws validation_error.
  void validate() const;
};

/// Builds the mode weights of a physical device by following a single photon
/// through every short/long arm choice. At stage s the long arm multiplies
/// the survival probability by f^(2^s); the final coupler halves each path
/// over the two detector outputs; detector efficiency scales every mode.
/// Mode order is arrival time, the two outputs interleaved: index 2t + out.
ModeWeights derive_mode_weights(const DetectorConfig& config);

}  // namespace tmd
