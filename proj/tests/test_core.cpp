#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "tmd/detector_config.hpp"
#include "tmd/errors.hpp"
#include "tmd/gating.hpp"
#include "tmd/mode_weights.hpp"
#include "tmd/timing.hpp"

using namespace tmd;

namespace {

// Tallies from the measured-weights example; arrival times put mode i at
// window [100 i, 100 i + 50).
constexpr std::uint64_t kPaperTallies[8] = {141, 112, 125, 121, 132, 105, 134, 129};
constexpr double kPaperWeights[8] = {0.141, 0.112, 0.125, 0.121, 0.132, 0.105, 0.134, 0.129};

std::vector<ToaEvent> make_events(std::span<const std::uint64_t> per_mode,
                                  std::uint64_t stray = 0) {
  std::vector<ToaEvent> events;
  for (std::size_t m = 0; m < per_mode.size(); ++m)
    for (std::uint64_t i = 0; i < per_mode[m]; ++i)
      events.push_back({static_cast<int>(m % 2), 100.0 * static_cast<double>(m) + 10.0});
  for (std::uint64_t i = 0; i < stray; ++i) events.push_back({0, 100.0 * 8 + 60.0});
  return events;
}

GateSpec make_gates(std::size_t n) {
  GateSpec gates;
  for (std::size_t m = 0; m < n; ++m)
    gates.windows.emplace_back(100.0 * static_cast<double>(m),
                               100.0 * static_cast<double>(m) + 50.0);
  return gates;
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  DetectorConfig config;
  config.stages = 0;
  CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("stages"), validation_error);
  config.stages = 2;
  config.fiber_transmission = 0.0;
  CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("fiber_transmission"),
                       validation_error);
  config.fiber_transmission = 0.9;
  config.coupler_ratios = {0.5};
  CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("coupler_ratios"), validation_error);
  config.coupler_ratios = {0.5, 0.6};
  CHECK_NOTHROW(config.validate());
}

TEST_CASE("lossless symmetric device spreads evenly") {
  DetectorConfig config;
  config.stages = 3;
  const ModeWeights w = derive_mode_weights(config);
  REQUIRE(w.mode_count() == 16);
  for (double v : w.weights) CHECK(v == doctest::Approx(1.0 / 16).epsilon(1e-14));
  CHECK(w.loss_fraction == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("detector efficiency scales every mode") {
  DetectorConfig config;
  config.stages = 2;
  config.detector_efficiency = 0.7;
  const ModeWeights w = derive_mode_weights(config);
  REQUIRE(w.mode_count() == 8);
  for (double v : w.weights) CHECK(v == doctest::Approx(0.0875).epsilon(1e-14));
  CHECK(w.loss_fraction == doctest::Approx(0.3).epsilon(1e-13));
}

TEST_CASE("lossy fibers match exhaustive path enumeration") {
  DetectorConfig config;
  config.stages = 3;
  config.fiber_transmission = 0.95;
  const ModeWeights w = derive_mode_weights(config);
  const double expected = oracles::path_enumeration_efficiency(config);
  CHECK(w.efficiency() == doctest::Approx(expected).epsilon(1e-14));
  CHECK(w.loss_fraction == doctest::Approx(1.0 - expected).epsilon(1e-14));

  SUBCASE("asymmetric couplers too") {
    config.coupler_ratios = {0.45, 0.55, 0.5};
    config.detector_efficiency = 0.8;
    const ModeWeights w2 = derive_mode_weights(config);
    CHECK(w2.efficiency() ==
          doctest::Approx(oracles::path_enumeration_efficiency(config)).epsilon(1e-14));
  }
}

TEST_CASE("later temporal modes carry the longer-fiber losses") {
  DetectorConfig config;
  config.stages = 2;
  config.fiber_transmission = 0.9;
  const ModeWeights w = derive_mode_weights(config);
  // Path 0 (all short) loses nothing; the last path (all long) sees f^(1+2).
  CHECK(w.weights[0] == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(w.weights[7] == doctest::Approx(0.125 * std::pow(0.9, 3)).epsilon(1e-14));
}

TEST_CASE("normalized weights sum to one") {
  ModeWeights w;
  w.weights = {0.2, 0.1, 0.3};
  const ModeWeights n = w.normalized();
  CHECK(n.efficiency() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.weights[2] == doctest::Approx(0.5).epsilon(1e-15));
  ModeWeights zero;
  zero.weights = {0.0, 0.0};
  CHECK_THROWS_AS(zero.normalized(), validation_error);
}

TEST_CASE("event integration reproduces the measured weights") {
  const auto events = make_events(kPaperTallies);
  const auto [weights, report] = weights_from_events(events, make_gates(8));
  REQUIRE(weights.mode_count() == 8);
  // Tallies sum to 999, so the normalized weights match the published
  // 3-decimal values to half an ulp of that rounding.
  for (std::size_t m = 0; m < 8; ++m)
    CHECK(std::abs(weights.weights[m] - kPaperWeights[m]) < 5e-4);
  CHECK(weights.efficiency() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.events_out_of_window == 0);
}

TEST_CASE("equal tallies give equal weights") {
  const std::vector<std::uint64_t> equal(8, 50);
  const auto [weights, report] = weights_from_events(make_events(equal), make_gates(8));
  for (double v : weights.weights) CHECK(v == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("out-of-window fraction is reported, not attributed") {
  const std::vector<std::uint64_t> per_mode(8, 45);  // 360 in-window
  const auto events = make_events(per_mode, 40);     // 10% stray
  const auto [weights, report] = weights_from_events(events, make_gates(8));
  CHECK(report.events_total == 400);
  CHECK(report.out_of_window_fraction() == doctest::Approx(0.10).epsilon(1e-14));
  CHECK(weights.efficiency() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ingestion error paths") {
  CHECK_THROWS_AS(weights_from_events({}, make_gates(4)), validation_error);
  std::vector<ToaEvent> stray{{0, 5000.0}, {1, 6000.0}};
  CHECK_THROWS_AS(weights_from_events(stray, make_gates(4)), validation_error);
  GateSpec overlapping;
  overlapping.windows = {{0.0, 100.0}, {50.0, 150.0}};
  CHECK_THROWS_AS(overlapping.validate(), validation_error);
  GateSpec inverted;
  inverted.windows = {{10.0, 10.0}};
  CHECK_THROWS_AS(inverted.validate(), validation_error);
}

TEST_CASE("ingested weights can be scaled to a known efficiency") {
  const std::vector<std::uint64_t> equal(4, 25);
  const auto [weights, report] = weights_from_events(make_events(equal), make_gates(4), 0.8);
  CHECK(weights.efficiency() == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(weights.loss_fraction == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("timing budget") {
  DetectorConfig config;
  config.base_delay_ns = 125.0;
  config.deadtime_ns = 60.0;

  SUBCASE("two stages run near 2.5 MHz") {
    config.stages = 2;
    const TimingReport report = timing(config);
    CHECK(report.longest_path_ns == doctest::Approx(375.0));
    CHECK(std::abs(report.max_rep_rate_hz - 2.5e6) / 2.5e6 < 0.10);
    CHECK_FALSE(report.deadtime_violation);
  }

  SUBCASE("three stages run near 1 MHz") {
    config.stages = 3;
    const TimingReport report = timing(config);
    CHECK(report.longest_path_ns == doctest::Approx(875.0));
    CHECK(std::abs(report.max_rep_rate_hz - 1.0e6) / 1.0e6 < 0.15);
  }

  SUBCASE("deadtime violation flagged") {
    config.stages = 2;
    config.base_delay_ns = 50.0;
    config.deadtime_ns = 60.0;
    CHECK(timing(config).deadtime_violation);
  }
}
