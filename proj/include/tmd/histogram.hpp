#pragma once

#include <cstdint>
#include <vector>

#include "tmd/distribution.hpp"

namespace tmd {

/// Raw event tallies per count value k = 0..N. Zero-count pulses are real
/// data and must be tallied: normalization is per trigger, not per click.
struct CountHistogram {
  std::vector<std::uint64_t> tallies;
  std::uint64_t pulses = 0;

  std::uint64_t total() const;
  bool empty() const { return pulses == 0; }
  double mean_count() const;

  /// Per-trigger frequencies as a count-number distribution.
  Distribution probabilities() const;

  /// Throws validation_error unless tallies sum to pulses.
  void validate() const;
};

}  // namespace tmd
