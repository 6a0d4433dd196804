#pragma once

// Data-parallel inner loops shared by the STL engine and the learners.
//
// Every kernel exists as a scalar reference plus optional AVX2 / NEON
// variants. The active table is picked once at startup from CPU features and
// can be overridden with PMON_SIMD=scalar|avx2|neon or set_backend().
//
// Elementwise kernels are bit-identical across backends (no FMA contraction,
// same min/max NaN convention). Reductions (dot) may differ in the last bits
// because the vector paths sum in a different order.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace pmon::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend b);

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = a < b ? a : b   (matches _mm256_min_pd operand order)
  void (*vmin)(const double* a, const double* b, double* out, std::size_t n);
  // out = a > b ? a : b
  void (*vmax)(const double* a, const double* b, double* out, std::size_t n);
  void (*vadd)(const double* a, const double* b, double* out, std::size_t n);
  void (*vsub)(const double* a, const double* b, double* out, std::size_t n);
  void (*vmul)(const double* a, const double* b, double* out, std::size_t n);
  // out = scale * a + offset, rounded after each operation
  void (*vaffine)(double scale, double offset, const double* a, double* out, std::size_t n);
  // out = a > threshold ? 1.0 : 0.0
  void (*vstep)(const double* a, double threshold, double* out, std::size_t n);
  // x = x > 0 ? x : 0
  void (*relu)(double* x, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the backend was not compiled in or the CPU lacks it.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Backends usable on this machine, scalar first.
std::vector<Backend> available_backends();
const KernelTable& table_for(Backend b);

const KernelTable& active();
void set_backend(Backend b);

// Convenience wrappers over active().
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace pmon::simd
