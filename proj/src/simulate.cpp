#include "tmd/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <string>

#include "tmd/errors.hpp"
#include "tmd/matrix.hpp"
#include "tmd/rng.hpp"

namespace tmd {

SourceSpec SourceSpec::coherent(double mu, std::uint64_t pulses) {
  SourceSpec s;
  s.kind = Kind::coherent;
  s.mu = mu;
  s.pulses = pulses;
  return s;
}

SourceSpec SourceSpec::fock(int n, std::uint64_t pulses) {
  SourceSpec s;
  s.kind = Kind::fock;
  s.photon_number = n;
  s.pulses = pulses;
  return s;
}

SourceSpec SourceSpec::custom(Distribution rho, std::uint64_t pulses) {
  SourceSpec s;
  s.kind = Kind::custom;
  s.custom_rho = std::move(rho);
  s.pulses = pulses;
  return s;
}

void SourceSpec::validate() const {
  if (pulses == 0) throw validation_error("source: pulses must be >= 1");
  switch (kind) {
    case Kind::coherent:
      if (!(mu >= 0.0) || !std::isfinite(mu))
        throw validation_error("source: coherent mean must be finite and >= 0");
      break;
    case Kind::fock:
      if (photon_number < 0) throw validation_error("source: fock photon number must be >= 0");
      break;
    case Kind::custom:
      if (!custom_rho.is_physical())
        throw validation_error("source: custom distribution must be physical");
      break;
  }
}

std::string SourceSpec::describe() const {
  char buf[64];
  switch (kind) {
    case Kind::coherent:
      std::snprintf(buf, sizeof buf, "coherent(mu=%g)", mu);
      return buf;
    case Kind::fock:
      std::snprintf(buf, sizeof buf, "fock(n=%d)", photon_number);
      return buf;
    case Kind::custom:
      return "custom";
  }
  return "unknown";
}

namespace {

std::string weights_digest_hex(const ModeWeights& weights) {
  // FNV-1a over the raw weight bytes; enough to tell configurations apart in
  // run metadata.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double w : weights.weights) {
    const auto bits = std::bit_cast<std::uint64_t>(w);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

SimResult simulate(const SourceSpec& source, const ModeWeights& weights, double eta,
                   std::uint64_t seed, const SimOptions& options) {
  source.validate();
  weights.validate();
  if (!(eta >= 0.0 && eta <= 1.0)) throw validation_error("simulate: eta must be in [0, 1]");
  if (!(options.dark_count_prob_per_mode >= 0.0 && options.dark_count_prob_per_mode < 1.0))
    throw validation_error("simulate: dark count probability must be in [0, 1)");

  const std::size_t n_modes = weights.mode_count();
  if (n_modes > 64)
    throw validation_error("simulate: at most 64 modes supported (got " +
                           std::to_string(n_modes) + ")");
  const ModeWeights assign = weights.normalized();
  const double dark = options.dark_count_prob_per_mode;

  SimResult result;
  result.seed = seed;
  result.generator = kGeneratorName;
  result.weights_digest = weights_digest_hex(weights);
  result.hist.tallies.assign(n_modes + 1, 0);
  result.hist.pulses = source.pulses;
  if (options.keep_records) result.records.reserve(std::min<std::uint64_t>(source.pulses, 1u << 20));

  for (std::uint64_t pulse = 0; pulse < source.pulses; ++pulse) {
    SplitMix64 rng(derive_stream(seed, pulse));

    std::uint64_t n_in = 0;
    switch (source.kind) {
      case SourceSpec::Kind::coherent: n_in = sample_poisson(rng, source.mu); break;
      case SourceSpec::Kind::fock: n_in = static_cast<std::uint64_t>(source.photon_number); break;
      case SourceSpec::Kind::custom:
        n_in = sample_index(rng, source.custom_rho.values);
        break;
    }

    const std::uint64_t survivors = sample_binomial(rng, n_in, eta);
    std::uint64_t occupied = 0;
    for (std::uint64_t p = 0; p < survivors; ++p)
      occupied |= std::uint64_t{1} << sample_index(rng, assign.weights);
    if (dark > 0.0)
      for (std::size_t m = 0; m < n_modes; ++m)
        if (rng.bernoulli(dark)) occupied |= std::uint64_t{1} << m;

    const int clicks = std::popcount(occupied);
    ++result.hist.tallies[static_cast<std::size_t>(clicks)];

    if (options.keep_records) {
      ShotRecord rec;
      rec.pulse = pulse;
      rec.photons_in = static_cast<int>(n_in);
      rec.photons_surviving = static_cast<int>(survivors);
      rec.counts = clicks;
      for (std::size_t m = 0; m < n_modes; ++m)
        if (occupied & (std::uint64_t{1} << m)) rec.occupied_modes.push_back(static_cast<int>(m));
      result.records.push_back(std::move(rec));
    }
  }
  return result;
}

std::vector<FockSweepRow> sweep_fock_diagonal(std::size_t modes, std::span<const int> j_values,
                                              std::span<const double> eta_values) {
  if (modes < 1) throw validation_error("sweep_fock_diagonal: modes must be >= 1");
  int j_top = 0;
  for (int j : j_values) {
    if (j < 1 || static_cast<std::size_t>(j) > modes)
      throw validation_error("sweep_fock_diagonal: j must be in [1, modes]");
    j_top = std::max(j_top, j);
  }
  for (double eta : eta_values)
    if (!(eta >= 0.0 && eta <= 1.0))
      throw validation_error("sweep_fock_diagonal: eta must be in [0, 1]");

  // Occupancy route: p(j|j) for equal weights, independent of the closed form.
  const std::vector<double> equal(modes, 1.0 / static_cast<double>(modes));
  const ConditionalMatrix c =
      conditional_matrix(equal, static_cast<std::size_t>(std::max(j_top, 1)));

  std::vector<FockSweepRow> rows;
  rows.reserve(j_values.size() * eta_values.size());
  for (int j : j_values) {
    // N! / (N^j (N-j)!) as a falling-factorial product to stay in range.
    double diag = 1.0;
    for (int i = 0; i < j; ++i)
      diag *= static_cast<double>(modes - static_cast<std::size_t>(i)) /
              static_cast<double>(modes);
    const double from_matrix =
        c.entries.at(static_cast<std::size_t>(j), static_cast<std::size_t>(j));
    for (double eta : eta_values) {
      FockSweepRow row;
      row.modes = modes;
      row.j = j;
      row.eta = eta;
      const double thin = std::pow(eta, static_cast<double>(j));
      row.analytic = diag * thin;
      row.from_matrix = from_matrix * thin;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace tmd
