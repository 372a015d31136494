#include "tmd/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tmd/errors.hpp"

namespace tmd {

double Distribution::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double Distribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += static_cast<double>(i) * values[i];
  return m;
}

bool Distribution::is_physical(double tol) const {
  if (values.empty()) return false;
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
  return std::abs(sum() - 1.0) <= tol;
}

Distribution Distribution::normalized() const {
  const double s = sum();
  if (!(s > 0.0)) throw validation_error("cannot normalize a zero-mass distribution");
  Distribution out = *this;
  for (double& v : out.values) v /= s;
  out.tail_mass.reset();
  return out;
}

Distribution Distribution::delta(std::size_t index, std::size_t n_max, DistKind kind) {
  if (index > n_max) throw validation_error("delta index exceeds truncation");
  Distribution out;
  out.kind = kind;
  out.values.assign(n_max + 1, 0.0);
  out.values[index] = 1.0;
  return out;
}

std::size_t default_truncation(double mu) {
  return std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(4.0 * mu)));
}

Distribution poisson_distribution(double mu, std::size_t n_max) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw validation_error("poisson mean must be finite and >= 0");
  Distribution out;
  out.kind = DistKind::photon_number;
  out.mu = mu;
  out.values.assign(n_max + 1, 0.0);
  if (mu == 0.0) {
    out.values[0] = 1.0;
    out.tail_mass = 0.0;
    return out;
  }
  // Upward recurrence from exp(-mu); for means large enough to underflow it,
  // per-entry evaluation in log space.
  if (mu < 700.0) {
    double term = std::exp(-mu);
    out.values[0] = term;
    for (std::size_t n = 1; n <= n_max; ++n) {
      term *= mu / static_cast<double>(n);
      out.values[n] = term;
    }
  } else {
    for (std::size_t n = 0; n <= n_max; ++n)
      out.values[n] = std::exp(static_cast<double>(n) * std::log(mu) - mu -
                               std::lgamma(static_cast<double>(n + 1)));
  }
  const double tail = std::max(0.0, 1.0 - out.sum());
  out.tail_mass = tail;
  if (tail > 1e-6)
    out.warnings.push_back("truncated_tail_mass=" + std::to_string(tail));
  return out;
}

Distribution binomial_count_model(double mu_prime, std::size_t modes) {
  if (!(mu_prime >= 0.0)) throw validation_error("mu_prime must be >= 0");
  if (modes < 1) throw validation_error("mode count must be >= 1");
  const double p0 = std::exp(-mu_prime / static_cast<double>(modes));
  Distribution out;
  out.kind = DistKind::count_number;
  out.mu = mu_prime;
  out.values.assign(modes + 1, 0.0);
  // Binomial(modes, 1 - p0) column via the loss-matrix machinery would do,
  // but the direct multiplicative form keeps this self-contained.
  LossMatrix thin = loss_matrix(1.0 - p0, modes);
  for (std::size_t k = 0; k <= modes; ++k) out.values[k] = thin.entries.at(k, modes);
  return out;
}

Distribution coherent_count_distribution(std::span<const double> weights, double mu) {
  if (!(mu >= 0.0)) throw validation_error("coherent mean must be >= 0");
  if (weights.empty()) throw validation_error("weights must not be empty");
  // Mode occupations of a coherent pulse are independent Poissons, so each
  // mode clicks independently: convolve the per-mode Bernoullis.
  std::vector<double> counts{1.0};
  counts.reserve(weights.size() + 1);
  for (double w : weights) {
    const double click = -std::expm1(-mu * w);
    counts.push_back(0.0);
    for (std::size_t k = counts.size() - 1; k > 0; --k)
      counts[k] = counts[k] * (1.0 - click) + counts[k - 1] * click;
    counts[0] *= (1.0 - click);
  }
  Distribution out;
  out.kind = DistKind::count_number;
  out.mu = mu;
  out.values = std::move(counts);
  return out;
}

namespace {

Distribution forward_impl(const ConditionalMatrix& c, const std::vector<double>& photon_vec,
                          const Distribution& rho) {
  if (photon_vec.size() != c.entries.cols)
    throw validation_error("forward: photon distribution length " +
                           std::to_string(photon_vec.size()) + " does not match matrix columns " +
                           std::to_string(c.entries.cols));
  Distribution out;
  out.kind = DistKind::count_number;
  out.values = apply_matrix(c.entries, photon_vec);
  out.warnings = rho.warnings;
  const double mass = rho.sum();
  if (mass < 1.0 - kPhysicalSumTol) {
    const std::string w = "truncation_mass=" + std::to_string(1.0 - mass);
    if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end())
      out.warnings.push_back(w);
  }
  return out;
}

}  // namespace

Distribution forward(const ConditionalMatrix& c, const LossMatrix& l, const Distribution& rho) {
  if (rho.kind != DistKind::photon_number)
    throw validation_error("forward expects a photon-number distribution");
  if (l.entries.cols != rho.values.size())
    throw validation_error("forward: loss matrix columns do not match distribution length");
  if (c.entries.cols != l.entries.rows)
    throw validation_error("forward: conditional matrix columns do not match loss matrix rows");
  return forward_impl(c, apply_matrix(l.entries, rho.values), rho);
}

Distribution forward(const ConditionalMatrix& c, const Distribution& rho) {
  if (rho.kind != DistKind::photon_number)
    throw validation_error("forward expects a photon-number distribution");
  return forward_impl(c, rho.values, rho);
}

}  // namespace tmd
