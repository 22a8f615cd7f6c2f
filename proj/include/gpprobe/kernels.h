#pragma once

// Dense inner loops used by the probe and by bundle validation. Each kernel
// has a scalar reference implementation and, on x86-64 builds, an AVX2+FMA
// variant. The variant is chosen once at startup from CPUID; setting
// GPPROBE_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace gpprobe::kernels {

struct KernelTable {
  std::string_view name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += x, widening float to double
  void (*accumulate_f32)(const float* x, double* y, std::size_t n);
  // sum_i x[i] in double precision
  double (*sum_f32)(const float* x, std::size_t n);
};

const KernelTable& Scalar();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* Avx2();

// The table used by the library. Thread-safe after first call.
const KernelTable& Active();

// Overrides the active table ("scalar", "avx2" or "auto"). Returns false
// when the requested variant is unavailable. Intended for tests and the
// --simd flag; not safe to call concurrently with running kernels.
bool SelectVariant(std::string_view name);

inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Active().dot(a.data(), b.data(), a.size());
}

inline double SquaredDistance(std::span<const double> a,
                              std::span<const double> b) {
  return Active().squared_distance(a.data(), b.data(), a.size());
}

inline void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  Active().axpy(alpha, x.data(), y.data(), x.size());
}

// out[r] = dot(row r of the row-major [rows, cols] matrix, x)
void MatVec(std::span<const double> matrix, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out);

}  // namespace gpprobe::kernels
