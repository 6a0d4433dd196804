#include "pmon/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define PMON_HAVE_AVX2 1
#endif

namespace pmon::simd {

#if PMON_HAVE_AVX2
namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  lo = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Elementwise kernels avoid FMA so every lane rounds exactly like the scalar loop.
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

template <typename VecOp, typename ScalarOp>
inline void binary_op(const double* a, const double* b, double* out, std::size_t n, VecOp vop,
                      ScalarOp sop) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, vop(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = sop(a[i], b[i]);
}

void vmin_avx2(const double* a, const double* b, double* out, std::size_t n) {
  binary_op(
      a, b, out, n, [](__m256d x, __m256d y) { return _mm256_min_pd(x, y); },
      [](double x, double y) { return x < y ? x : y; });
}

void vmax_avx2(const double* a, const double* b, double* out, std::size_t n) {
  binary_op(
      a, b, out, n, [](__m256d x, __m256d y) { return _mm256_max_pd(x, y); },
      [](double x, double y) { return x > y ? x : y; });
}

void vadd_avx2(const double* a, const double* b, double* out, std::size_t n) {
  binary_op(
      a, b, out, n, [](__m256d x, __m256d y) { return _mm256_add_pd(x, y); },
      [](double x, double y) { return x + y; });
}

void vsub_avx2(const double* a, const double* b, double* out, std::size_t n) {
  binary_op(
      a, b, out, n, [](__m256d x, __m256d y) { return _mm256_sub_pd(x, y); },
      [](double x, double y) { return x - y; });
}

void vmul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  binary_op(
      a, b, out, n, [](__m256d x, __m256d y) { return _mm256_mul_pd(x, y); },
      [](double x, double y) { return x * y; });
}

void vaffine_avx2(double scale, double offset, const double* a, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d vo = _mm256_set1_pd(offset);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(vs, _mm256_loadu_pd(a + i)), vo));
  }
  for (; i < n; ++i) out[i] = scale * a[i] + offset;
}

void vstep_avx2(const double* a, double threshold, double* out, std::size_t n) {
  const __m256d vt = _mm256_set1_pd(threshold);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(a + i), vt, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(mask, one));
  }
  for (; i < n; ++i) out[i] = a[i] > threshold ? 1.0 : 0.0;
}

void relu_avx2(double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // max_pd(x, 0) returns 0 for NaN, the scalar loop does too.
    _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace

const KernelTable* avx2_table() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable table{Backend::Avx2, dot_avx2,  axpy_avx2,    vmin_avx2,
                                 vmax_avx2,     vadd_avx2, vsub_avx2,    vmul_avx2,
                                 vaffine_avx2,  vstep_avx2, relu_avx2};
  return supported ? &table : nullptr;
}
#else
const KernelTable* avx2_table() { return nullptr; }
#endif

}  // namespace pmon::simd
