#pragma once

#include <cstddef>
#include <string_view>

namespace p2t::kernels {

// Double-precision inner loops behind the tensor ops. Every entry has a scalar
// reference implementation and (on x86-64) an AVX2+FMA variant; the active set
// is picked once at startup. Elementwise entries are bitwise-identical across
// backends; dot/gemm reassociate the reduction and agree to ~1e-13 relative.
struct Kernels {
  void (*add)(std::size_t n, const double* a, const double* b, double* out);
  void (*sub)(std::size_t n, const double* a, const double* b, double* out);
  void (*mul)(std::size_t n, const double* a, const double* b, double* out);
  void (*scale)(std::size_t n, const double* a, double s, double* out);
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* a, const double* b);
  // C (m x n) = A (m x k) * B (k x n), row-major; accumulates into C when acc.
  void (*gemm)(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c, bool acc);
  const char* name;
};

const Kernels& scalar();
#if defined(__x86_64__)
const Kernels& avx2();
bool avx2_supported();
#endif

// Active set: honors P2T_KERNELS=scalar|avx2 when set, otherwise best available.
const Kernels& active();

}  // namespace p2t::kernels
