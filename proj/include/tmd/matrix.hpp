#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tmd {

/// Dense row-major matrix, just enough for the transfer algebra here.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  const double* row(std::size_t r) const { return a.data() + r * cols; }

  static Matrix identity(std::size_t n);
};

Matrix matmul(const Matrix& lhs, const Matrix& rhs);

/// y = M x through the active kernel backend. x size must equal cols.
std::vector<double> apply_matrix(const Matrix& m, std::span<const double> x);

/// Count-statistics transfer matrix of a lossless N-mode splitter:
/// entries(k, n) = p(k|n), the probability that n photons thrown
/// independently into N modes (mode i with probability P_i) occupy exactly k
/// of them. Rows run k = 0..min(N, n_max), columns n = 0..n_max.
struct ConditionalMatrix {
  Matrix entries;
  std::size_t mode_count = 0;
  std::size_t truncation = 0;  // n_max

  std::size_t max_count() const { return entries.rows - 1; }
};

/// Binomial thinning map at efficiency eta: entries(n', n) = C(n, n')
/// eta^n' (1-eta)^(n-n'), square over 0..n_max.
struct LossMatrix {
  Matrix entries;
  double efficiency = 1.0;
};

struct CondOptions {
  std::size_t max_modes = 20;   // subset table is 2^N doubles
  std::size_t max_truncation = 1024;
};

/// Exact occupancy probabilities by inclusion-exclusion over mode subsets.
///
/// With sigma_S = sum of weights in subset S, the chance that all n photons
/// land inside S is sigma_S^n, and sieving exact-occupancy out of the subset
/// lattice collapses to
///
///   p(k|n) = sum_{j<=k} (-1)^(k-j) C(N-j, k-j) W_j(n),
///   W_j(n) = sum_{|S|=j} sigma_S^n.
///
/// The W_j are segmented power sums over all 2^N subset sums, grouped by
/// subset size; that reduction is the kernel-dispatched inner loop. The final
/// alternating sums are Neumaier-compensated since the binomial factors grow
/// to ~1e4 while results shrink to ~1e-5.
///
/// weights must be normalized (sum 1 within 1e-9): losses belong in the
/// LossMatrix, never here. Throws validation_error when weights are not a
/// distribution or the size caps are exceeded.
ConditionalMatrix conditional_matrix(std::span<const double> weights, std::size_t n_max,
                                     const CondOptions& options = {});

/// Same distribution for N equal modes via the occupancy recurrence
///   o(k; n+1) = o(k; n) k/N + o(k-1; n) (N-k+1)/N.
/// Used as an independent route for diagonal checks and as the backing of
/// sweep_fock_diagonal.
std::vector<double> equal_weight_occupancy_column(std::size_t modes, std::size_t n);

LossMatrix loss_matrix(double eta, std::size_t n_max);

/// Tolerance contract on the transfer matrices: every column is a
/// probability distribution to this accuracy. Holds through N = 16 modes at
/// any truncation up to the cap; the N = 20 corner degrades to ~2e-12 as the
/// alternating binomial weights reach C(20,10).
inline constexpr double kColumnSumTol = 1e-12;

}  // namespace tmd
