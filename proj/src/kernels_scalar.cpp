#include "p2t/kernels.hpp"

#include <cstring>

namespace p2t::kernels {
namespace {

void add_s(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_s(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_s(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_s(std::size_t n, const double* a, double s, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * s;
}

void axpy_s(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot_s(std::size_t n, const double* a, const double* b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemm_s(std::size_t m, std::size_t k, std::size_t n, const double* a,
            const double* b, double* c, bool acc) {
  if (!acc) std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

}  // namespace

const Kernels& scalar() {
  static const Kernels k{add_s, sub_s, mul_s, scale_s, axpy_s, dot_s, gemm_s,
                         "scalar"};
  return k;
}

}  // namespace p2t::kernels
