#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "p2t/kernels.hpp"

namespace p2t::kernels {
namespace {

const Kernels& select() {
  const char* env = std::getenv("P2T_KERNELS");
  const std::string_view want = env ? env : "";
  if (want == "scalar") return scalar();
#if defined(__x86_64__)
  if (want == "avx2") {
    if (!avx2_supported())
      throw std::runtime_error("P2T_KERNELS=avx2 but CPU lacks AVX2/FMA");
    return avx2();
  }
  if (want.empty() && avx2_supported()) return avx2();
#endif
  if (!want.empty() && want != "scalar")
    throw std::runtime_error("unknown P2T_KERNELS value");
  return scalar();
}

}  // namespace

const Kernels& active() {
  static const Kernels& k = select();
  return k;
}

}  // namespace p2t::kernels
