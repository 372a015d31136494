#include "tmd/gating.hpp"

#include <algorithm>
#include <string>

#include "tmd/errors.hpp"

namespace tmd {

void GateSpec::validate() const {
  if (windows.empty()) throw validation_error("gate spec must contain at least one window");
  for (std::size_t i = 0; i < windows.size(); ++i)
    if (!(windows[i].second > windows[i].first))
      throw validation_error("gate window " + std::to_string(i) + " has non-positive width");
  for (std::size_t i = 0; i < windows.size(); ++i)
    for (std::size_t j = i + 1; j < windows.size(); ++j) {
      const auto& a = windows[i];
      const auto& b = windows[j];
      if (a.first < b.second && b.first < a.second)
        throw validation_error("gate windows " + std::to_string(i) + " and " + std::to_string(j) +
                               " overlap");
    }
}

int GateSpec::match(double t_ns) const {
  for (std::size_t i = 0; i < windows.size(); ++i)
    if (t_ns >= windows[i].first && t_ns < windows[i].second) return static_cast<int>(i);
  return -1;
}

std::pair<ModeWeights, RejectionReport> weights_from_events(std::span<const ToaEvent> events,
                                                            const GateSpec& gates, double eta) {
  gates.validate();
  if (!(eta > 0.0 && eta <= 1.0)) throw validation_error("eta must be in (0, 1]");
  if (events.empty()) throw validation_error("event stream is empty");

  std::vector<std::uint64_t> counts(gates.windows.size(), 0);
  RejectionReport report;
  report.events_total = events.size();
  for (const ToaEvent& ev : events) {
    const int mode = gates.match(ev.arrival_ns);
    if (mode < 0)
      ++report.events_out_of_window;
    else
      ++counts[static_cast<std::size_t>(mode)];
  }

  const std::uint64_t in_window = report.events_total - report.events_out_of_window;
  if (in_window == 0) throw validation_error("no event falls inside any gate window");

  ModeWeights weights;
  weights.weights.reserve(counts.size());
  for (std::uint64_t c : counts)
    weights.weights.push_back(eta * static_cast<double>(c) / static_cast<double>(in_window));
  weights.loss_fraction = 1.0 - eta;
  return {std::move(weights), report};
}

}  // namespace tmd
