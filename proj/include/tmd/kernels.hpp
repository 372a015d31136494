#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tmd::kern {

// Hot numeric loops live behind this table: a scalar reference build and an
// AVX2 build selected at runtime. Variants must agree to ~1e-13 relative
// (tested in test_kernels); they are not bit-identical because vector lanes
// reorder the summations.
struct Backend {
  const char* name;

  /// dot(a, b) over len elements.
  double (*dot)(const double* a, const double* b, std::size_t len);

  /// y = M x for row-major M (rows x cols). y must not alias x.
  void (*matvec)(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);

  /// Running power sums over segmented data. vals holds `count` numbers split
  /// into nseg contiguous segments, seg_offsets[j]..seg_offsets[j+1]. On
  /// return out[n * nseg + j] = sum over segment j of vals[i]^n for
  /// n = 0..max_power (n = 0 row is the segment size). work: count doubles.
  void (*power_sums)(const double* vals, std::size_t count, const std::size_t* seg_offsets,
                     std::size_t nseg, std::size_t max_power, double* out, double* work);
};

/// Currently selected backend. First call picks the best supported variant
/// unless the TMD_KERNEL environment variable names one explicitly.
const Backend& active();

/// Force a backend by name ("scalar", "avx2"). Throws validation_error for an
/// unknown or unsupported name. Not thread-safe: call at startup or from
/// single-threaded test code only.
void select(const std::string& name);

/// Names of every backend usable on this machine.
std::vector<std::string> available();

const Backend& scalar_backend();
const Backend* avx2_backend();  // nullptr when unsupported

}  // namespace tmd::kern
