#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tmd/mode_weights.hpp"

namespace tmd {

/// One time-of-arrival record from the acquisition system.
struct ToaEvent {
  int detector = 0;
  double arrival_ns = 0.0;
};

/// Accept windows, one per temporal mode, in mode order. Events outside every
/// window are rejected (afterpulses and dark counts live there).
struct GateSpec {
  std::vector<std::pair<double, double>> windows;

  /// Windows must have positive width and be pairwise disjoint.
  void validate() const;

  /// Index of the window containing t, or -1.
  int match(double t_ns) const;
};

struct RejectionReport {
  std::uint64_t events_total = 0;
  std::uint64_t events_out_of_window = 0;
  double out_of_window_fraction() const {
    return events_total == 0 ? 0.0 : static_cast<double>(events_out_of_window) /
                                         static_cast<double>(events_total);
  }
};

/// Integrates in-window counts per mode and scales them so the weights sum to
/// `eta` (the independently known device efficiency; 1 when unknown).
/// Throws on an empty stream or when no event lands in any window.
std::pair<ModeWeights, RejectionReport> weights_from_events(std::span<const ToaEvent> events,
                                                            const GateSpec& gates,
                                                            double eta = 1.0);

}  // namespace tmd
