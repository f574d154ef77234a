#pragma once

#include <cstddef>
#include <cstdint>

#include "tilelab/region.hpp"

namespace tilelab {

// Anchor-counting kernels over packed coordinate arrays. The scalar bodies
// are the reference; the AVX2 bodies must match them bit for bit (closed
// comparisons, no fused contractions), which the test suite enforces.

std::int64_t count_in_region_scalar(const double* x, const double* y, std::size_t n,
                                    const Region& r);
void count_per_class_scalar(const double* x, const double* y, const std::int32_t* cls,
                            std::size_t n, const Region& r, std::int64_t* acc);

// Defined in the AVX2 translation unit when the build carries one; otherwise
// these forward to the scalar bodies so they stay callable everywhere.
std::int64_t count_in_region_avx2(const double* x, const double* y, std::size_t n,
                                  const Region& r);
void count_per_class_avx2(const double* x, const double* y, const std::int32_t* cls,
                          std::size_t n, const Region& r, std::int64_t* acc);

// Runtime-dispatched entry points: AVX2 when compiled in, supported by the
// CPU and not disabled via TILELAB_NO_SIMD.
std::int64_t count_in_region(const double* x, const double* y, std::size_t n, const Region& r);
void count_per_class(const double* x, const double* y, const std::int32_t* cls, std::size_t n,
                     const Region& r, std::int64_t* acc);

bool kernels_compiled_avx2();
bool simd_active();
const char* kernel_backend();  // "avx2" or "scalar"

}  // namespace tilelab
