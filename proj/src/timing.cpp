#include "tmd/timing.hpp"

namespace tmd {

TimingReport timing(const DetectorConfig& config) {
  config.validate();
  TimingReport report;
  report.stages = config.stages;
  report.delta_t_ns = config.base_delay_ns;
  // Longest path takes every long arm: (2^m - 1) base delays.
  report.longest_path_ns =
      static_cast<double>((1 << config.stages) - 1) * config.base_delay_ns;
  report.max_rep_rate_hz = 1.0 / (report.longest_path_ns * 1e-9);
  report.deadtime_violation = config.deadtime_violation();
  return report;
}

}  // namespace tmd
