#include "pmon/simd.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#define PMON_HAVE_NEON 1
#endif

namespace pmon::simd {

#if PMON_HAVE_NEON
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// vminq_f64 propagates NaN, so select explicitly to keep the scalar convention.
void vmin_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t va = vld1q_f64(a + i), vb = vld1q_f64(b + i);
    vst1q_f64(out + i, vbslq_f64(vcltq_f64(va, vb), va, vb));
  }
  for (; i < n; ++i) out[i] = a[i] < b[i] ? a[i] : b[i];
}

void vmax_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t va = vld1q_f64(a + i), vb = vld1q_f64(b + i);
    vst1q_f64(out + i, vbslq_f64(vcgtq_f64(va, vb), va, vb));
  }
  for (; i < n; ++i) out[i] = a[i] > b[i] ? a[i] : b[i];
}

void vadd_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void vsub_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void vmul_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void vaffine_neon(double scale, double offset, const double* a, double* out, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(scale);
  const float64x2_t vo = vdupq_n_f64(offset);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vmulq_f64(vs, vld1q_f64(a + i)), vo));
  for (; i < n; ++i) out[i] = scale * a[i] + offset;
}

void vstep_neon(const double* a, double threshold, double* out, std::size_t n) {
  const float64x2_t vt = vdupq_n_f64(threshold);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vbslq_f64(vcgtq_f64(vld1q_f64(a + i), vt), one, zero));
  for (; i < n; ++i) out[i] = a[i] > threshold ? 1.0 : 0.0;
}

void relu_neon(double* x, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    vst1q_f64(x + i, vbslq_f64(vcgtq_f64(v, zero), v, zero));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{Backend::Neon, dot_neon,  axpy_neon,    vmin_neon,
                                 vmax_neon,     vadd_neon, vsub_neon,    vmul_neon,
                                 vaffine_neon,  vstep_neon, relu_neon};
  return &table;
}
#else
const KernelTable* neon_table() { return nullptr; }
#endif

}  // namespace pmon::simd
