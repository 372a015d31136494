#include <cmath>
#include <cstddef>

#include "tmd/kernels.hpp"

namespace tmd::kern {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t len) {
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) acc += a[i] * b[i];
  return acc;
}

void matvec_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(m + r * cols, x, cols);
}

// Neumaier-compensated sum of one segment of the running power array.
double segment_sum(const double* v, std::size_t len) {
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    double t = sum + v[i];
    if (std::abs(sum) >= std::abs(v[i]))
      comp += (sum - t) + v[i];
    else
      comp += (v[i] - t) + sum;
    sum = t;
  }
  return sum + comp;
}

void power_sums_scalar(const double* vals, std::size_t count, const std::size_t* seg_offsets,
                       std::size_t nseg, std::size_t max_power, double* out, double* work) {
  for (std::size_t j = 0; j < nseg; ++j)
    out[j] = static_cast<double>(seg_offsets[j + 1] - seg_offsets[j]);
  for (std::size_t i = 0; i < count; ++i) work[i] = 1.0;
  for (std::size_t n = 1; n <= max_power; ++n) {
    for (std::size_t i = 0; i < count; ++i) work[i] *= vals[i];
    for (std::size_t j = 0; j < nseg; ++j)
      out[n * nseg + j] =
          segment_sum(work + seg_offsets[j], seg_offsets[j + 1] - seg_offsets[j]);
  }
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{"scalar", dot_scalar, matvec_scalar, power_sums_scalar};
  return backend;
}

}  // namespace tmd::kern
