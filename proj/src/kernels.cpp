#include "tilelab/kernels.hpp"

#include <cstdlib>

namespace tilelab {

bool kernels_compiled_avx2() {
#if defined(TILELAB_HAVE_AVX2)
  return true;
#else
  return false;
#endif
}

bool simd_active() {
  static const bool active = [] {
#if defined(TILELAB_HAVE_AVX2)
    if (std::getenv("TILELAB_NO_SIMD")) return false;
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
  }();
  return active;
}

const char* kernel_backend() { return simd_active() ? "avx2" : "scalar"; }

#if !defined(TILELAB_HAVE_AVX2)

std::int64_t count_in_region_avx2(const double* x, const double* y, std::size_t n,
                                  const Region& r) {
  return count_in_region_scalar(x, y, n, r);
}

void count_per_class_avx2(const double* x, const double* y, const std::int32_t* cls,
                          std::size_t n, const Region& r, std::int64_t* acc) {
  count_per_class_scalar(x, y, cls, n, r, acc);
}

#endif

std::int64_t count_in_region(const double* x, const double* y, std::size_t n, const Region& r) {
  if (simd_active()) return count_in_region_avx2(x, y, n, r);
  return count_in_region_scalar(x, y, n, r);
}

void count_per_class(const double* x, const double* y, const std::int32_t* cls, std::size_t n,
                     const Region& r, std::int64_t* acc) {
  if (simd_active()) return count_per_class_avx2(x, y, cls, n, r, acc);
  count_per_class_scalar(x, y, cls, n, r, acc);
}

}  // namespace tilelab
