#include "variants.h"

namespace gpprobe::kernels::detail {
namespace {

double DotScalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double SquaredDistanceScalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void AxpyScalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void AccumulateF32Scalar(const float* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += static_cast<double>(x[i]);
}

double SumF32Scalar(const float* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(x[i]);
  return s;
}

}  // namespace

const KernelTable kScalarTable = {
    "scalar",         DotScalar,    SquaredDistanceScalar,
    AxpyScalar,       AccumulateF32Scalar, SumF32Scalar,
};

}  // namespace gpprobe::kernels::detail
