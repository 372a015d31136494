#include "tmd/matrix.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "tmd/errors.hpp"
#include "tmd/kernels.hpp"

namespace tmd {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.cols != rhs.rows) throw validation_error("matmul: inner dimensions do not match");
  Matrix out(lhs.rows, rhs.cols);
  for (std::size_t i = 0; i < lhs.rows; ++i)
    for (std::size_t k = 0; k < lhs.cols; ++k) {
      const double v = lhs.at(i, k);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols; ++j) out.at(i, j) += v * rhs.at(k, j);
    }
  return out;
}

std::vector<double> apply_matrix(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols) throw validation_error("matvec: vector length does not match columns");
  std::vector<double> y(m.rows);
  kern::active().matvec(m.a.data(), m.rows, m.cols, x.data(), y.data());
  return y;
}

namespace {

// Pascal triangle row cache for the inclusion-exclusion weights; exact in
// double for the N <= 20 cap.
std::vector<double> pascal_row(std::size_t n) {
  std::vector<double> row(n + 1, 1.0);
  for (std::size_t k = 1; k <= n; ++k)
    row[k] = row[k - 1] * static_cast<double>(n - k + 1) / static_cast<double>(k);
  return row;
}

double neumaier_add(double& sum, double term, double& comp) {
  const double t = sum + term;
  if (std::abs(sum) >= std::abs(term))
    comp += (sum - t) + term;
  else
    comp += (term - t) + sum;
  sum = t;
  return t;
}

}  // namespace

ConditionalMatrix conditional_matrix(std::span<const double> weights, std::size_t n_max,
                                     const CondOptions& options) {
  const std::size_t n_modes = weights.size();
  if (n_modes == 0) throw validation_error("conditional_matrix: weights must not be empty");
  if (n_modes > options.max_modes)
    throw validation_error("conditional_matrix: " + std::to_string(n_modes) +
                           " modes exceeds the cap of " + std::to_string(options.max_modes));
  if (n_max < 1) throw validation_error("conditional_matrix: n_max must be >= 1");
  if (n_max > options.max_truncation)
    throw validation_error("conditional_matrix: n_max " + std::to_string(n_max) +
                           " exceeds the cap of " + std::to_string(options.max_truncation));
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw validation_error("conditional_matrix: weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw validation_error("conditional_matrix: weights must sum to 1 (got " +
                           std::to_string(total) + "); normalize first, losses go in the loss matrix");

  const std::size_t subsets = std::size_t{1} << n_modes;

  // Subset sums sigma_S by dynamic programming over the lattice.
  std::vector<double> sums(subsets, 0.0);
  for (std::size_t idx = 1; idx < subsets; ++idx) {
    const std::size_t low = idx & (~idx + 1);
    sums[idx] = sums[idx ^ low] + weights[static_cast<std::size_t>(std::countr_zero(low))];
  }

  // Regroup contiguously by subset size for the segmented kernel.
  std::vector<std::size_t> offsets(n_modes + 2, 0);
  for (std::size_t idx = 0; idx < subsets; ++idx)
    ++offsets[static_cast<std::size_t>(std::popcount(idx)) + 1];
  for (std::size_t j = 1; j < offsets.size(); ++j) offsets[j] += offsets[j - 1];
  std::vector<double> vals(subsets);
  {
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t idx = 0; idx < subsets; ++idx)
      vals[cursor[static_cast<std::size_t>(std::popcount(idx))]++] = sums[idx];
  }
  sums.clear();
  sums.shrink_to_fit();

  const std::size_t nseg = n_modes + 1;
  std::vector<double> w_sums((n_max + 1) * nseg);
  std::vector<double> work(subsets);
  kern::active().power_sums(vals.data(), subsets, offsets.data(), nseg, n_max, w_sums.data(),
                            work.data());

  const std::size_t k_max = std::min(n_modes, n_max);
  ConditionalMatrix out;
  out.mode_count = n_modes;
  out.truncation = n_max;
  out.entries = Matrix(k_max + 1, n_max + 1);
  out.entries.at(0, 0) = 1.0;

  // p(k|n) = sum_j (-1)^(k-j) C(N-j, k-j) W_j(n); the binomial factors come
  // from counting supersets of each size-j subset.
  std::vector<std::vector<double>> choose(n_modes + 1);
  for (std::size_t a = 0; a <= n_modes; ++a) choose[a] = pascal_row(a);

  for (std::size_t n = 1; n <= n_max; ++n) {
    const double* w_row = w_sums.data() + n * nseg;
    const std::size_t top = std::min(n, k_max);
    for (std::size_t k = 1; k <= top; ++k) {
      double sum = 0.0, comp = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {  // j = 0 term is sigma-empty = 0
        const double c = choose[n_modes - j][k - j];
        const double term = ((k - j) % 2 == 0) ? c * w_row[j] : -c * w_row[j];
        neumaier_add(sum, term, comp);
      }
      double p = sum + comp;
      if (p < 0.0) p = 0.0;  // roundoff guard; true values are >= 0
      if (p > 1.0) p = 1.0;
      out.entries.at(k, n) = p;
    }
  }
  return out;
}

std::vector<double> equal_weight_occupancy_column(std::size_t modes, std::size_t n) {
  if (modes == 0) throw validation_error("equal_weight_occupancy_column: modes must be >= 1");
  const std::size_t k_max = std::min(modes, n);
  std::vector<double> occ(k_max + 1, 0.0);
  occ[0] = 1.0;
  const double inv_n = 1.0 / static_cast<double>(modes);
  std::vector<double> next(k_max + 1, 0.0);
  for (std::size_t step = 0; step < n; ++step) {
    for (std::size_t k = 0; k <= k_max; ++k) {
      double v = occ[k] * static_cast<double>(k) * inv_n;
      if (k > 0) v += occ[k - 1] * static_cast<double>(modes - k + 1) * inv_n;
      next[k] = v;
    }
    occ.swap(next);
  }
  return occ;
}

LossMatrix loss_matrix(double eta, std::size_t n_max) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw validation_error("loss_matrix: eta must be in [0, 1]");
  LossMatrix out;
  out.efficiency = eta;
  out.entries = Matrix(n_max + 1, n_max + 1);
  Matrix& l = out.entries;

  if (eta == 1.0) {
    for (std::size_t n = 0; n <= n_max; ++n) l.at(n, n) = 1.0;
    return out;
  }
  if (eta == 0.0) {
    for (std::size_t n = 0; n <= n_max; ++n) l.at(0, n) = 1.0;
    return out;
  }

  for (std::size_t n = 0; n <= n_max; ++n) {
    // Start at the mode of binomial(n, eta) and recur outward; the linear
    // recurrence keeps relative accuracy and never under/overflows the way a
    // (1-eta)^n start does.
    const std::size_t mode =
        std::min(n, static_cast<std::size_t>(static_cast<double>(n + 1) * eta));
    double start;
    if (n <= 56) {
      // Binomial coefficients up to C(56,28) are exact in double.
      double coeff = 1.0;
      for (std::size_t i = 1; i <= mode; ++i)
        coeff = coeff * static_cast<double>(n - i + 1) / static_cast<double>(i);
      start = coeff * std::pow(eta, static_cast<double>(mode)) *
              std::pow(1.0 - eta, static_cast<double>(n - mode));
    } else {
      const double lc = std::lgamma(static_cast<double>(n + 1)) -
                        std::lgamma(static_cast<double>(mode + 1)) -
                        std::lgamma(static_cast<double>(n - mode + 1));
      start = std::exp(lc + static_cast<double>(mode) * std::log(eta) +
                       static_cast<double>(n - mode) * std::log1p(-eta));
    }

    l.at(mode, n) = start;
    const double odds = eta / (1.0 - eta);
    double v = start;
    for (std::size_t k = mode; k < n; ++k) {
      v *= odds * static_cast<double>(n - k) / static_cast<double>(k + 1);
      if (v < 1e-320) break;
      l.at(k + 1, n) = v;
    }
    v = start;
    for (std::size_t k = mode; k > 0; --k) {
      v *= static_cast<double>(k) / (odds * static_cast<double>(n - k + 1));
      if (v < 1e-320) break;
      l.at(k - 1, n) = v;
    }

    if (n > 56) {  // pin mass conservation where lgamma limits the start value
      double sum = 0.0;
      for (std::size_t k = 0; k <= n; ++k) sum += l.at(k, n);
      for (std::size_t k = 0; k <= n; ++k) l.at(k, n) /= sum;
    }
  }
  return out;
}

}  // namespace tmd
