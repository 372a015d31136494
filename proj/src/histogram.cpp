#include "tmd/histogram.hpp"

#include <string>

#include "tmd/errors.hpp"

namespace tmd {

std::uint64_t CountHistogram::total() const {
  std::uint64_t t = 0;
  for (std::uint64_t v : tallies) t += v;
  return t;
}

double CountHistogram::mean_count() const {
  if (pulses == 0) return 0.0;
  double m = 0.0;
  for (std::size_t k = 0; k < tallies.size(); ++k)
    m += static_cast<double>(k) * static_cast<double>(tallies[k]);
  return m / static_cast<double>(pulses);
}

Distribution CountHistogram::probabilities() const {
  validate();
  if (pulses == 0) throw validation_error("histogram has no pulses");
  Distribution out;
  out.kind = DistKind::count_number;
  out.values.reserve(tallies.size());
  for (std::uint64_t v : tallies)
    out.values.push_back(static_cast<double>(v) / static_cast<double>(pulses));
  return out;
}

void CountHistogram::validate() const {
  if (tallies.empty()) throw validation_error("histogram has no bins");
  if (total() != pulses)
    throw validation_error("histogram tallies sum to " + std::to_string(total()) +
                           " but pulses = " + std::to_string(pulses) +
                           "; zero-count pulses must be tallied");
}

}  // namespace tmd
