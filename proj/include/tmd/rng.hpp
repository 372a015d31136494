#pragma once

#include <cstdint>
#include <span>

namespace tmd {

/// Counter-style generator built on the splitmix64 mixer. The whole state is
/// one 64-bit word, so substreams for pulse i / replicate r are derived in
/// O(1) with derive_stream and never overlap in practice. Identical seeds
/// give identical sequences on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

inline constexpr const char* kGeneratorName = "splitmix64";

/// Key for an independent substream (seed, index): two mix rounds so that
/// consecutive indices land far apart in state space.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64::mix(seed ^ SplitMix64::mix(index + 0x9E3779B97F4A7C15ull));
}

/// Exact Poisson sample via CDF inversion; large means are reduced by the
/// additivity X ~ P(a) + P(mu-a). No truncation.
std::uint64_t sample_poisson(SplitMix64& rng, double mu);

/// Number of survivors out of n independent Bernoulli(eta) trials.
std::uint64_t sample_binomial(SplitMix64& rng, std::uint64_t n, double eta);

/// Index drawn from an unnormalized weight vector (linear CDF scan).
std::size_t sample_index(SplitMix64& rng, std::span<const double> weights);

/// `trials` categorical draws from `probs`, tallied into `out` (same length).
void sample_multinomial(SplitMix64& rng, std::uint64_t trials, std::span<const double> probs,
                        std::span<std::uint64_t> out);

}  // namespace tmd
