#include "tmd/rng.hpp"

#include <cmath>

#include "tmd/errors.hpp"

namespace tmd {
namespace {

// Inversion by sequential search; safe for mu <= 64 (exp(-64) is far above
// the underflow threshold).
std::uint64_t poisson_small(SplitMix64& rng, double mu) {
  if (mu <= 0.0) return 0;
  const double u = rng.next_double();
  double term = std::exp(-mu);
  double cum = term;
  std::uint64_t n = 0;
  while (u >= cum) {
    ++n;
    term *= mu / static_cast<double>(n);
    cum += term;
    if (term < 1e-320) break;  // u in the far tail; cum has saturated
  }
  return n;
}

}  // namespace

std::uint64_t sample_poisson(SplitMix64& rng, double mu) {
  if (!(mu >= 0.0)) throw validation_error("poisson mean must be >= 0");
  std::uint64_t n = 0;
  while (mu > 64.0) {  // P(a + b) = P(a) + P(b) for independent pieces
    n += poisson_small(rng, 64.0);
    mu -= 64.0;
  }
  return n + poisson_small(rng, mu);
}

std::uint64_t sample_binomial(SplitMix64& rng, std::uint64_t n, double eta) {
  if (eta >= 1.0) return n;
  if (eta <= 0.0) return 0;
  std::uint64_t k = 0;
  for (std::uint64_t i = 0; i < n; ++i) k += rng.bernoulli(eta) ? 1 : 0;
  return k;
}

std::size_t sample_index(SplitMix64& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = rng.next_double() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    cum += weights[i];
    if (target < cum) return i;
  }
  return weights.empty() ? 0 : weights.size() - 1;
}

void sample_multinomial(SplitMix64& rng, std::uint64_t trials, std::span<const double> probs,
                        std::span<std::uint64_t> out) {
  if (out.size() != probs.size())
    throw validation_error("multinomial output size must match probability vector");
  for (auto& o : out) o = 0;
  for (std::uint64_t t = 0; t < trials; ++t) ++out[sample_index(rng, probs)];
}

}  // namespace tmd
