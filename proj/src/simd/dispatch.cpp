#include "pmon/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace pmon::simd {

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::Scalar};
  if (avx2_table()) out.push_back(Backend::Avx2);
  if (neon_table()) out.push_back(Backend::Neon);
  return out;
}

const KernelTable& table_for(Backend b) {
  const KernelTable* t = nullptr;
  switch (b) {
    case Backend::Scalar: t = &scalar_table(); break;
    case Backend::Avx2: t = avx2_table(); break;
    case Backend::Neon: t = neon_table(); break;
  }
  if (!t) throw std::runtime_error("simd backend not available: " + std::string(to_string(b)));
  return *t;
}

namespace {

const KernelTable* pick_default() {
  if (const char* env = std::getenv("PMON_SIMD")) {
    std::string_view want{env};
    for (Backend b : available_backends()) {
      if (to_string(b) == want) return &table_for(b);
    }
  }
  if (auto* t = avx2_table()) return t;
  if (auto* t = neon_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{pick_default()};
  return ptr;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_backend(Backend b) { current().store(&table_for(b), std::memory_order_release); }

}  // namespace pmon::simd
