#include <atomic>
#include <cstdlib>
#include <string>

#include "gpprobe/log.h"
#include "variants.h"

namespace gpprobe::kernels {
namespace {

bool CpuHasAvx2() {
#if defined(GPPROBE_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* Detect() {
  if (const char* env = std::getenv("GPPROBE_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &detail::kScalarTable;
    if (want == "avx2" && Avx2() == nullptr) {
      log::Warn("GPPROBE_SIMD=avx2 requested but unavailable; using scalar");
    }
  }
  if (const KernelTable* t = Avx2()) return t;
  return &detail::kScalarTable;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable& Scalar() { return detail::kScalarTable; }

const KernelTable* Avx2() {
#if defined(GPPROBE_WITH_AVX2)
  static const bool supported = CpuHasAvx2();
  return supported ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& Active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = Detect();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

bool SelectVariant(std::string_view name) {
  if (name == "scalar") {
    g_active = &detail::kScalarTable;
    return true;
  }
  if (name == "avx2") {
    const KernelTable* t = Avx2();
    if (t == nullptr) return false;
    g_active = t;
    return true;
  }
  if (name == "auto") {
    g_active = Detect();
    return true;
  }
  return false;
}

void MatVec(std::span<const double> matrix, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out) {
  const KernelTable& k = Active();
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = k.dot(matrix.data() + r * cols, x.data(), cols);
  }
}

}  // namespace gpprobe::kernels
