#include <cstdlib>
#include <string_view>

#include "fluxlattice/simd/kernels.hpp"

namespace fluxlattice::simd {

#if defined(FLUXLATTICE_BUILD_AVX2)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(FLUXLATTICE_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() {
  static const KernelTable& selected = []() -> const KernelTable& {
    if (const char* env = std::getenv("FLUXLATTICE_SIMD")) {
      if (std::string_view{env} == "scalar") return scalar_kernels();
    }
    if (const KernelTable* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return selected;
}

}  // namespace fluxlattice::simd
