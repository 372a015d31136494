#include "tmd/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tmd/errors.hpp"
#include "tmd/kernels.hpp"
#include "tmd/rng.hpp"

namespace tmd {

const char* method_name(Method m) {
  switch (m) {
    case Method::binomial_fit: return "binomial-fit";
    case Method::poisson_forward_fit: return "poisson-forward-fit";
    case Method::inversion: return "inversion";
    case Method::max_likelihood: return "max-likelihood";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "binomial-fit" || name == "binom-fit") return Method::binomial_fit;
  if (name == "poisson-forward-fit" || name == "poisson-fit") return Method::poisson_forward_fit;
  if (name == "inversion" || name == "invert") return Method::inversion;
  if (name == "max-likelihood" || name == "ml") return Method::max_likelihood;
  throw validation_error("unknown reconstruction method: " + name);
}

std::vector<std::string> Diagnostics::to_strings() const {
  std::vector<std::string> out;
  if (negative_entries) out.emplace_back("negative_entries");
  if (sum_deviation) out.emplace_back("sum_deviation");
  if (condition_warning) out.emplace_back("condition_warning");
  return out;
}

namespace {

// 1-D derivative-free minimizer: coarse log-spaced grid to bracket, then
// golden-section to ~1e-6 relative. Objectives here are smooth and unimodal
// near their minimum but cheap enough that the 64-point sweep costs nothing.
template <typename F>
double minimize_scalar(F&& f, double lo, double hi) {
  constexpr int kGridPoints = 64;
  constexpr double kRelTol = 1e-6;

  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  double best_x = lo, best_f = f(lo);
  std::vector<double> xs(kGridPoints);
  for (int i = 0; i < kGridPoints; ++i) {
    xs[i] = std::exp(log_lo + (log_hi - log_lo) * i / (kGridPoints - 1));
    const double fx = f(xs[i]);
    if (fx < best_f) {
      best_f = fx;
      best_x = xs[i];
    }
  }
  auto it = std::lower_bound(xs.begin(), xs.end(), best_x);
  const std::size_t idx = static_cast<std::size_t>(it - xs.begin());
  double a = idx > 0 ? xs[idx - 1] : lo;
  double b = idx + 1 < xs.size() ? xs[idx + 1] : hi;

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > kRelTol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  const double mid = 0.5 * (a + b);
  return f(mid) < best_f ? mid : best_x;
}

double sse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Poisson vector extended until the truncated tail is negligible, so fit
// results always report a physical distribution.
Distribution physical_poisson(double mu) {
  std::size_t n_max = default_truncation(mu);
  for (;;) {
    Distribution rho = poisson_distribution(mu, n_max);
    if (rho.tail_mass.value_or(0.0) <= 1e-12 || n_max > 100000) return rho;
    n_max *= 2;
  }
}

void require_nonempty(const CountHistogram& hist) {
  hist.validate();
  if (hist.pulses == 0) throw validation_error("histogram is empty (zero pulses)");
}

}  // namespace

ReconstructionResult fit_binomial(const CountHistogram& hist, std::size_t modes) {
  require_nonempty(hist);
  if (hist.tallies.size() != modes + 1)
    throw validation_error("fit_binomial: histogram has " + std::to_string(hist.tallies.size()) +
                           " bins but the model needs modes + 1 = " + std::to_string(modes + 1));
  const Distribution p_hat = hist.probabilities();

  // Inner closed-form normalization, outer 1-D search on mu'.
  auto objective = [&](double mu) {
    const Distribution model = binomial_count_model(mu, modes);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k <= modes; ++k) {
      num += p_hat.values[k] * model.values[k];
      den += model.values[k] * model.values[k];
    }
    const double scale = den > 0.0 ? num / den : 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k <= modes; ++k) {
      const double d = p_hat.values[k] - scale * model.values[k];
      s += d * d;
    }
    return s;
  };

  ReconstructionResult result;
  result.method = Method::binomial_fit;
  const double mean_k = hist.mean_count();
  double mu_hat = 0.0;
  if (mean_k > 0.0) mu_hat = minimize_scalar(objective, 1e-3, 10.0 * mean_k);
  result.mu_estimate = mu_hat;
  result.residual = objective(mu_hat);
  result.rho = physical_poisson(mu_hat);
  return result;
}

ReconstructionResult fit_poisson_forward(const CountHistogram& hist, const ConditionalMatrix& c,
                                         const LossMatrix& l) {
  require_nonempty(hist);
  if (hist.tallies.size() != c.entries.rows)
    throw validation_error("fit_poisson_forward: histogram bins do not match matrix rows");
  const Distribution p_hat = hist.probabilities();
  const std::size_t n_max = c.truncation;

  // The data is per-trigger normalized, so the truncated model is compared
  // shape-to-shape; otherwise the missing Poisson tail mass biases mu upward.
  auto objective = [&](double mu) {
    Distribution model = forward(c, l, poisson_distribution(mu, n_max));
    const double mass = model.sum();
    double s = 0.0;
    for (std::size_t k = 0; k < p_hat.values.size(); ++k) {
      const double d = p_hat.values[k] - (mass > 0.0 ? model.values[k] / mass : 0.0);
      s += d * d;
    }
    return s;
  };

  ReconstructionResult result;
  result.method = Method::poisson_forward_fit;
  const double mean_k = hist.mean_count();
  double mu_hat = 0.0;
  if (mean_k > 0.0) mu_hat = minimize_scalar(objective, 1e-3, 10.0 * mean_k);
  result.mu_estimate = mu_hat;
  result.residual = objective(mu_hat);
  result.rho = physical_poisson(mu_hat);
  return result;
}

ReconstructionResult invert(const CountHistogram& hist, const ConditionalMatrix& c,
                            const LossMatrix& l, const InvertOptions& options) {
  require_nonempty(hist);
  return invert(hist.probabilities(), c, l, options);
}

ReconstructionResult invert(const Distribution& p_hat, const ConditionalMatrix& c,
                            const LossMatrix& l, const InvertOptions& options) {
  if (p_hat.values.size() != c.entries.rows)
    throw validation_error("invert: histogram bins do not match matrix rows");
  if (c.entries.cols != l.entries.rows)
    throw validation_error("invert: conditional and loss matrices do not conform");

  // Square truncation to min(N, n_max) + 1; C and L are triangular, so the
  // product is too and back-substitution is the whole solve.
  const std::size_t size = std::min(c.mode_count, c.truncation) + 1;
  const Matrix full = matmul(c.entries, l.entries);
  Matrix m(size, size);
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t col = 0; col < size; ++col) m.at(r, col) = full.at(r, col);

  ReconstructionResult result;
  result.method = Method::inversion;
  for (std::size_t k = 0; k < size; ++k) {
    if (m.at(k, k) == 0.0)
      throw numerical_error("invert: singular system, zero diagonal at k = " + std::to_string(k));
    if (m.at(k, k) < options.condition_threshold) result.diagnostics.condition_warning = true;
  }

  std::vector<double> rho(size, 0.0);
  for (std::size_t kk = size; kk-- > 0;) {
    double acc = p_hat.values[kk];
    for (std::size_t j = kk + 1; j < size; ++j) acc -= m.at(kk, j) * rho[j];
    rho[kk] = acc / m.at(kk, kk);
  }

  // Never clip: unphysical values are the honest output of this method.
  double sum = 0.0;
  for (double v : rho) {
    sum += v;
    if (v < -1e-12) result.diagnostics.negative_entries = true;
  }
  if (std::abs(sum - 1.0) > kPhysicalSumTol) result.diagnostics.sum_deviation = true;

  result.rho.kind = DistKind::photon_number;
  result.rho.values = std::move(rho);
  result.residual = sse(p_hat.values, apply_matrix(m, result.rho.values));
  return result;
}

ReconstructionResult ml_reconstruct(const CountHistogram& hist, const Matrix& combined,
                                    const MlOptions& options) {
  require_nonempty(hist);
  if (hist.tallies.size() != combined.rows)
    throw validation_error("ml_reconstruct: histogram bins do not match matrix rows");
  for (std::size_t n = 0; n < combined.cols; ++n) {
    double col = 0.0;
    for (std::size_t k = 0; k < combined.rows; ++k) col += combined.at(k, n);
    if (std::abs(col - 1.0) > 1e-6)
      throw validation_error("ml_reconstruct: matrix column " + std::to_string(n) +
                             " is not stochastic (sums to " + std::to_string(col) + ")");
  }
  for (std::size_t k = 0; k < combined.rows; ++k) {
    if (hist.tallies[k] == 0) continue;
    bool all_zero = true;
    for (std::size_t n = 0; n < combined.cols; ++n)
      if (combined.at(k, n) != 0.0) {
        all_zero = false;
        break;
      }
    if (all_zero)
      throw numerical_error("ml_reconstruct: data mass at k = " + std::to_string(k) +
                            " but the model row is identically zero");
  }

  const std::size_t rows = combined.rows, cols = combined.cols;
  Matrix transposed(cols, rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t n = 0; n < cols; ++n) transposed.at(n, r) = combined.at(r, n);

  const double total = static_cast<double>(hist.pulses);
  std::vector<double> rho(cols, 1.0 / static_cast<double>(cols));
  std::vector<double> q(rows), ratio(rows), scale(cols);
  const auto& k = kern::active();

  // Discrepancy target: a fit is "done" once chi^2 reaches what multinomial
  // noise alone would produce. One constraint (the total) is spent.
  std::size_t occupied = 0;
  for (std::uint64_t h : hist.tallies) occupied += h > 0 ? 1 : 0;
  const double dof = occupied > 1 ? static_cast<double>(occupied - 1) : 0.0;

  double prev_ll = -std::numeric_limits<double>::infinity();
  double ll = prev_ll;
  std::size_t iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    k.matvec(combined.a.data(), rows, cols, rho.data(), q.data());
    ll = 0.0;
    double chi2 = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double h = static_cast<double>(hist.tallies[r]);
      if (q[r] <= 0.0) {
        if (h > 0.0)
          throw numerical_error("ml_reconstruct: model probability vanished at k = " +
                                std::to_string(r));
        ratio[r] = 0.0;
        continue;
      }
      const double expected = total * q[r];
      const double dev = h - expected;
      chi2 += dev * dev / expected;
      if (h == 0.0) {
        ratio[r] = 0.0;
        continue;
      }
      ll += h * std::log(q[r]);
      ratio[r] = h / q[r];
    }
    if (options.enforce_monotone && ll + 1e-9 + 1e-12 * std::abs(ll) < prev_ll)
      throw numerical_error("ml_reconstruct: log-likelihood decreased");
    if (options.discrepancy_stop && dof > 0.0 && chi2 <= dof) break;
    if (std::abs(ll - prev_ll) <= options.rel_tol * (std::abs(ll) + 1.0)) break;
    prev_ll = ll;

    k.matvec(transposed.a.data(), cols, rows, ratio.data(), scale.data());
    for (std::size_t n = 0; n < cols; ++n) rho[n] *= scale[n] / total;
  }

  ReconstructionResult result;
  result.method = Method::max_likelihood;
  result.rho.kind = DistKind::photon_number;
  result.rho.values = std::move(rho);
  result.residual = -ll;
  result.iterations = iter;
  return result;
}

BayesTable bayes_table(const Distribution& prior, const ConditionalMatrix& c,
                       const LossMatrix& l) {
  if (!prior.is_physical())
    throw validation_error("bayes_table: prior must be a physical photon-number distribution");
  if (l.entries.cols != prior.values.size())
    throw validation_error("bayes_table: prior length does not match loss matrix");
  if (c.entries.cols != l.entries.rows)
    throw validation_error("bayes_table: matrices do not conform");

  const Matrix combined = matmul(c.entries, l.entries);
  const std::vector<double> p_k = apply_matrix(combined, prior.values);

  BayesTable table;
  table.prior = prior;
  table.entries = Matrix(combined.cols, combined.rows);
  table.defined.assign(combined.rows, false);
  for (std::size_t kk = 0; kk < combined.rows; ++kk) {
    if (p_k[kk] <= 0.0) continue;  // column undefined, not zero-filled
    table.defined[kk] = true;
    for (std::size_t n = 0; n < combined.cols; ++n)
      table.entries.at(n, kk) = prior.values[n] * combined.at(kk, n) / p_k[kk];
  }
  return table;
}

McErrorBars mc_error_bars(const Distribution& count_probs,
                          const std::function<ReconstructionResult(const CountHistogram&)>& pipeline,
                          std::uint64_t pulses, std::size_t replicates, std::uint64_t seed) {
  if (replicates < 2) throw validation_error("mc_error_bars: need at least 2 replicates");
  if (pulses == 0) throw validation_error("mc_error_bars: need at least 1 pulse");
  for (double v : count_probs.values)
    if (!(v >= 0.0)) throw validation_error("mc_error_bars: count probabilities must be >= 0");

  std::vector<std::vector<double>> samples;
  samples.reserve(replicates);
  std::size_t failures = 0;
  std::size_t width = 0;
  for (std::size_t r = 0; r < replicates; ++r) {
    SplitMix64 rng(derive_stream(seed, r));
    CountHistogram hist;
    hist.tallies.assign(count_probs.values.size(), 0);
    hist.pulses = pulses;
    sample_multinomial(rng, pulses, count_probs.values, hist.tallies);
    try {
      ReconstructionResult res = pipeline(hist);
      width = std::max(width, res.rho.values.size());
      samples.push_back(std::move(res.rho.values));
    } catch (const std::exception&) {
      ++failures;
    }
  }
  if (failures * 2 > replicates)
    throw numerical_error("mc_error_bars: pipeline failed on " + std::to_string(failures) +
                          " of " + std::to_string(replicates) + " replicates");

  McErrorBars out;
  out.replicates_used = samples.size();
  out.failures = failures;
  out.stddev.assign(width, 0.0);
  std::vector<double> mean(width, 0.0);
  for (const auto& s : samples)
    for (std::size_t i = 0; i < s.size(); ++i) mean[i] += s[i];
  for (double& m : mean) m /= static_cast<double>(samples.size());
  for (const auto& s : samples)
    for (std::size_t i = 0; i < width; ++i) {
      const double d = (i < s.size() ? s[i] : 0.0) - mean[i];
      out.stddev[i] += d * d;
    }
  for (double& v : out.stddev) v = std::sqrt(v / static_cast<double>(samples.size() - 1));
  return out;
}

}  // namespace tmd
