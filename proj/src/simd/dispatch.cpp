#include <cstdlib>
#include <string>

#include "dmk/simd_kernels.hpp"
#include "dmk/types.hpp"

namespace dmk::simd {

#if DMK_HAVE_AVX2_TU
const Kernels* avx2_kernels_impl();
#endif

const Kernels* avx2_kernels() {
#if DMK_HAVE_AVX2_TU && defined(__x86_64__)
  if (__builtin_cpu_supports("avx2")) return avx2_kernels_impl();
#endif
  return nullptr;
}

const Kernels& active() {
  static const Kernels* chosen = [] {
    const char* env = std::getenv("DMK_KERNEL");
    if (env) {
      std::string want(env);
      if (want == "scalar") return &scalar_kernels();
      if (want == "avx2") {
        const Kernels* k = avx2_kernels();
        require(k != nullptr, ErrorCode::BadArgument, "DMK_KERNEL=avx2 requested but AVX2 is unavailable");
        return k;
      }
      fail(ErrorCode::BadArgument, "DMK_KERNEL must be 'scalar' or 'avx2'");
    }
    const Kernels* k = avx2_kernels();
    return k ? k : &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace dmk::simd
