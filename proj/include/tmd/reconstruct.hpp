#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tmd/distribution.hpp"
#include "tmd/histogram.hpp"
#include "tmd/matrix.hpp"

namespace tmd {

enum class Method { binomial_fit, poisson_forward_fit, inversion, max_likelihood };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct Diagnostics {
  bool negative_entries = false;
  bool sum_deviation = false;
  bool condition_warning = false;

  bool clean() const { return !negative_entries && !sum_deviation && !condition_warning; }
  std::vector<std::string> to_strings() const;
};

struct ReconstructionResult {
  Distribution rho;
  Method method = Method::inversion;
  std::optional<double> mu_estimate;
  double residual = 0.0;  // SSE for fits/inversion, -log L for ML
  Diagnostics diagnostics;
  std::optional<std::vector<double>> error_bars;
  std::size_t iterations = 0;
};

/// Least-squares fit of the histogram to the equal-mode binomial count model
/// with mean mu' and a free normalization. The normalization solve is closed
/// form; mu' is bracketed on a log grid over [1e-3, 10 * mean count] and
/// polished by golden-section to 1e-6 relative. rho is the Poisson
/// distribution with the fitted mean (coherent-input assumption).
ReconstructionResult fit_binomial(const CountHistogram& hist, std::size_t modes);

/// Least-squares fit of mu >= 0 in || p_hat - C L Poisson(mu) ||^2, same 1-D
/// search. rho is the fitted Poisson.
ReconstructionResult fit_poisson_forward(const CountHistogram& hist, const ConditionalMatrix& c,
                                         const LossMatrix& l);

struct InvertOptions {
  /// Columns whose C*L diagonal falls below this raise condition_warning.
  double condition_threshold = 1e-3;
};

/// Direct inversion rho = (C L)^-1 p_hat on the square truncation to
/// min(N, n_max) + 1, by back-substitution (both factors are triangular).
/// Never clips: negative entries and sum deviations are preserved in rho and
/// flagged in diagnostics - the instability near singular diagonals is the
/// honest output of this method. Throws numerical_error naming k when a
/// diagonal is exactly zero.
ReconstructionResult invert(const CountHistogram& hist, const ConditionalMatrix& c,
                            const LossMatrix& l, const InvertOptions& options = {});

/// Same solve on an exact count-probability vector (no histogram rounding).
ReconstructionResult invert(const Distribution& p_hat, const ConditionalMatrix& c,
                            const LossMatrix& l, const InvertOptions& options = {});

struct MlOptions {
  std::size_t max_iterations = 100000;
  double rel_tol = 1e-10;
  /// Stop once Pearson chi^2 between data and model falls to the degrees of
  /// freedom (discrepancy principle). Iterating further fits multinomial
  /// noise, not signal: fully converged deconvolution through these
  /// ill-conditioned matrices lands ~0.15 total variation from the truth on
  /// 1e4-pulse data, against ~0.02 with the discrepancy stop. Exact data
  /// (chi^2 -> 0) is unaffected and converges to the likelihood plateau.
  bool discrepancy_stop = true;
  /// Throw numerical_error if the log-likelihood ever decreases (test builds).
  bool enforce_monotone = false;
};

/// Maximum-likelihood deconvolution of the multinomial count data through the
/// combined matrix M = C L, by the multiplicative EM update
///
///   rho_n <- rho_n * sum_k M_kn h_k / (M rho)_k / sum_k h_k,
///
/// which preserves nonnegativity and total mass by construction, and whose
/// log-likelihood is nondecreasing. Stops at the discrepancy criterion (see
/// MlOptions), a relative log-likelihood change below rel_tol, or the
/// iteration cap, whichever comes first. residual is the final negative
/// log-likelihood.
ReconstructionResult ml_reconstruct(const CountHistogram& hist, const Matrix& combined,
                                    const MlOptions& options = {});

/// Single-shot confidence table p~(n|k) = prior_n [C L]_kn / [C L prior]_k.
/// Columns whose count probability is zero are reported undefined, not
/// zero-filled.
struct BayesTable {
  Matrix entries;  // (n_max+1) x (K+1)
  std::vector<bool> defined;
  Distribution prior;
};

BayesTable bayes_table(const Distribution& prior, const ConditionalMatrix& c, const LossMatrix& l);

struct McErrorBars {
  std::vector<double> stddev;
  std::size_t replicates_used = 0;
  std::size_t failures = 0;
};

/// Per-bin standard deviation of a reconstruction pipeline under multinomial
/// resampling: draws `replicates` histograms of `pulses` events from
/// count_probs, reruns the pipeline on each, and reports the sample standard
/// deviation of every rho bin. Replicate r uses the substream
/// derive_stream(seed, r), so results are seed-deterministic regardless of
/// evaluation order. Errors out when more than half the replicates fail.
McErrorBars mc_error_bars(const Distribution& count_probs,
                          const std::function<ReconstructionResult(const CountHistogram&)>& pipeline,
                          std::uint64_t pulses, std::size_t replicates, std::uint64_t seed);

}  // namespace tmd
