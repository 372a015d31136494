// AVX2 + FMA variants of the hot loops. Compiled with -mavx2 -mfma on x86;
// selection happens at runtime in kernels.cpp, so the rest of the library
// stays baseline-portable.

#include <cmath>

#include "tmd/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__) && (defined(__x86_64__) || defined(_M_X64))
#define TMD_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#endif

namespace tmd::kern {

#if defined(TMD_HAVE_AVX2_BUILD)

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

double dot_avx2(const double* a, const double* b, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= len; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) acc += a[i] * b[i];
  return acc;
}

void matvec_avx2(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(m + r * cols, x, cols);
}

// Branch-free TwoSum (Knuth): acc + v exactly, rounding error into comp.
inline void two_sum(__m256d& acc, __m256d v, __m256d& comp) {
  const __m256d s = _mm256_add_pd(acc, v);
  const __m256d bp = _mm256_sub_pd(s, acc);
  const __m256d err = _mm256_add_pd(_mm256_sub_pd(acc, _mm256_sub_pd(s, bp)),
                                    _mm256_sub_pd(v, bp));
  comp = _mm256_add_pd(comp, err);
  acc = s;
}

// Fused pass per power: work *= vals elementwise while accumulating
// compensated segment sums in two vector lanes, so this variant matches the
// scalar Neumaier reference to full precision. Segments are processed
// independently; unaligned heads/tails stay scalar.
void power_sums_avx2(const double* vals, std::size_t count, const std::size_t* seg_offsets,
                     std::size_t nseg, std::size_t max_power, double* out, double* work) {
  for (std::size_t j = 0; j < nseg; ++j)
    out[j] = static_cast<double>(seg_offsets[j + 1] - seg_offsets[j]);
  for (std::size_t i = 0; i < count; ++i) work[i] = 1.0;
  for (std::size_t n = 1; n <= max_power; ++n) {
    for (std::size_t j = 0; j < nseg; ++j) {
      const std::size_t begin = seg_offsets[j];
      const std::size_t end = seg_offsets[j + 1];
      __m256d acc0 = _mm256_setzero_pd(), comp0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd(), comp1 = _mm256_setzero_pd();
      std::size_t i = begin;
      for (; i + 8 <= end; i += 8) {
        __m256d w0 = _mm256_mul_pd(_mm256_loadu_pd(work + i), _mm256_loadu_pd(vals + i));
        __m256d w1 = _mm256_mul_pd(_mm256_loadu_pd(work + i + 4), _mm256_loadu_pd(vals + i + 4));
        _mm256_storeu_pd(work + i, w0);
        _mm256_storeu_pd(work + i + 4, w1);
        two_sum(acc0, w0, comp0);
        two_sum(acc1, w1, comp1);
      }
      for (; i + 4 <= end; i += 4) {
        __m256d w0 = _mm256_mul_pd(_mm256_loadu_pd(work + i), _mm256_loadu_pd(vals + i));
        _mm256_storeu_pd(work + i, w0);
        two_sum(acc0, w0, comp0);
      }
      alignas(32) double lanes[16];
      _mm256_store_pd(lanes, acc0);
      _mm256_store_pd(lanes + 4, acc1);
      _mm256_store_pd(lanes + 8, comp0);
      _mm256_store_pd(lanes + 12, comp1);
      double acc = 0.0, comp = 0.0;
      for (double lane : lanes) {
        const double t = acc + lane;
        if (std::abs(acc) >= std::abs(lane))
          comp += (acc - t) + lane;
        else
          comp += (lane - t) + acc;
        acc = t;
      }
      acc += comp;
      for (; i < end; ++i) {
        work[i] *= vals[i];
        acc += work[i];
      }
      out[n * nseg + j] = acc;
    }
  }
}

const Backend avx2_table{"avx2", dot_avx2, matvec_avx2, power_sums_avx2};

bool cpu_supports_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

const Backend* avx2_backend() { return cpu_supports_avx2() ? &avx2_table : nullptr; }

#else

const Backend* avx2_backend() { return nullptr; }

#endif

}  // namespace tmd::kern
