#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tmd/distribution.hpp"
#include "tmd/histogram.hpp"
#include "tmd/mode_weights.hpp"

namespace tmd {

/// What enters the detector each trigger.
struct SourceSpec {
  enum class Kind { coherent, fock, custom };
  Kind kind = Kind::coherent;
  double mu = 0.0;          // coherent mean
  int photon_number = 0;    // fock
  Distribution custom_rho;  // custom
  std::uint64_t pulses = 0;

  static SourceSpec coherent(double mu, std::uint64_t pulses);
  static SourceSpec fock(int n, std::uint64_t pulses);
  static SourceSpec custom(Distribution rho, std::uint64_t pulses);

  void validate() const;
  std::string describe() const;
};

/// One trigger, fully resolved. With dark counts enabled, occupied modes may
/// exceed the surviving photons; the counts <= survivors invariant holds only
/// for the default dark_count_prob = 0.
struct ShotRecord {
  std::uint64_t pulse = 0;
  int photons_in = 0;
  int photons_surviving = 0;
  std::vector<int> occupied_modes;
  int counts = 0;
};

struct SimOptions {
  double dark_count_prob_per_mode = 0.0;
  bool keep_records = false;
};

struct SimResult {
  CountHistogram hist;
  std::vector<ShotRecord> records;  // populated only when requested
  std::uint64_t seed = 0;
  std::string generator;
  std::string weights_digest;
};

/// Per pulse: draw n from the source, thin to n' survivors by independent
/// Bernoulli(eta), drop each survivor into a mode according to the
/// (normalized) weights, optionally flip dark counts per mode, count occupied
/// modes. Pulse i runs on substream derive_stream(seed, i), so the histogram
/// is identical however the pulse loop is scheduled.
SimResult simulate(const SourceSpec& source, const ModeWeights& weights, double eta,
                   std::uint64_t seed, const SimOptions& options = {});

/// Row of the all-detected diagonal sweep: probability that j photons in give
/// exactly j clicks, via the closed form N!/(N^j (N-j)!) eta^j and via the
/// occupancy matrix, side by side.
struct FockSweepRow {
  std::size_t modes = 0;
  int j = 0;
  double eta = 1.0;
  double analytic = 0.0;
  double from_matrix = 0.0;
};

std::vector<FockSweepRow> sweep_fock_diagonal(std::size_t modes, std::span<const int> j_values,
                                              std::span<const double> eta_values);

}  // namespace tmd
