#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmd/matrix.hpp"
#include "tmd/mode_weights.hpp"

namespace tmd {

enum class DistKind { photon_number, count_number };

/// Probability vector over photon number n or count number k, index from 0.
/// Construction routines attach warnings (e.g. truncated tail mass) instead
/// of silently normalizing; reconstruction methods may return vectors that
/// fail is_physical and flag that in their diagnostics.
struct Distribution {
  std::vector<double> values;
  DistKind kind = DistKind::photon_number;
  std::vector<std::string> warnings;
  std::optional<double> mu;         // mean parameter when built from one
  std::optional<double> tail_mass;  // truncated mass when known

  std::size_t size() const { return values.size(); }
  std::size_t n_max() const { return values.empty() ? 0 : values.size() - 1; }
  double sum() const;
  double mean() const;
  bool is_physical(double tol = 1e-9) const;
  Distribution normalized() const;

  static Distribution delta(std::size_t index, std::size_t n_max, DistKind kind);
};

inline constexpr double kPhysicalSumTol = 1e-9;

/// Truncated Poisson; entries are exact pmf values (never renormalized), the
/// missing tail is recorded in tail_mass and warned about above 1e-6.
Distribution poisson_distribution(double mu, std::size_t n_max);

/// Count statistics of a mean-mu_prime coherent pulse split over N identical
/// modes: every mode clicks independently with probability 1 - P0,
/// P0 = exp(-mu_prime / N), so counts are binomial(N, 1 - P0).
Distribution binomial_count_model(double mu_prime, std::size_t modes);

/// Count statistics of a coherent pulse of mean mu through arbitrary
/// (possibly lossy, unnormalized) mode weights: mode i clicks independently
/// with probability 1 - exp(-mu w_i); the count distribution is their
/// Poisson-binomial convolution. Exact in N^2 operations - no photon-number
/// truncation - which makes it the reference for the loss-model equivalence
/// checks.
Distribution coherent_count_distribution(std::span<const double> weights, double mu);

/// p = C L rho. rho must be photon-number over exactly C.truncation + 1
/// entries. A truncation warning is attached when rho carries less than
/// 1 - 1e-9 of its mass (the result then underestimates every count).
Distribution forward(const ConditionalMatrix& c, const LossMatrix& l, const Distribution& rho);

/// Lossless forward p = C rho.
Distribution forward(const ConditionalMatrix& c, const Distribution& rho);

/// Default photon-number truncation for coherent workflows.
std::size_t default_truncation(double mu);

}  // namespace tmd
