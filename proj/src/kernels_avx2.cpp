#include "tilelab/kernels.hpp"

#if defined(TILELAB_HAVE_AVX2)

#include <immintrin.h>

namespace tilelab {

namespace {

// Lane masks for x in [lo, hi].
inline __m256d band_mask(__m256d v, __m256d lo, __m256d hi) {
  return _mm256_and_pd(_mm256_cmp_pd(v, lo, _CMP_GE_OQ), _mm256_cmp_pd(v, hi, _CMP_LE_OQ));
}

}  // namespace

std::int64_t count_in_region_avx2(const double* x, const double* y, std::size_t n,
                                  const Region& r) {
  std::int64_t count = 0;
  std::size_t i = 0;
  switch (r.kind) {
    case Region::Kind::Interval: {
      const double lo = r.center.x - r.half.x, hi = r.center.x + r.half.x;
      const __m256d vlo = _mm256_set1_pd(lo), vhi = _mm256_set1_pd(hi);
      for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        count += __builtin_popcount(_mm256_movemask_pd(band_mask(vx, vlo, vhi)));
      }
      for (; i < n; ++i) count += (x[i] >= lo) & (x[i] <= hi);
      break;
    }
    case Region::Kind::Box: {
      const double lx = r.center.x - r.half.x, hx = r.center.x + r.half.x;
      const double ly = r.center.y - r.half.y, hy = r.center.y + r.half.y;
      const __m256d vlx = _mm256_set1_pd(lx), vhx = _mm256_set1_pd(hx);
      const __m256d vly = _mm256_set1_pd(ly), vhy = _mm256_set1_pd(hy);
      for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d m = _mm256_and_pd(band_mask(vx, vlx, vhx), band_mask(vy, vly, vhy));
        count += __builtin_popcount(_mm256_movemask_pd(m));
      }
      for (; i < n; ++i)
        count += (x[i] >= lx) & (x[i] <= hx) & (y[i] >= ly) & (y[i] <= hy);
      break;
    }
    case Region::Kind::Disk: {
      const double rr = r.radius * r.radius;
      const __m256d vcx = _mm256_set1_pd(r.center.x), vcy = _mm256_set1_pd(r.center.y);
      const __m256d vrr = _mm256_set1_pd(rr);
      for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vcx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vcy);
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        count += __builtin_popcount(
            _mm256_movemask_pd(_mm256_cmp_pd(d2, vrr, _CMP_LE_OQ)));
      }
      for (; i < n; ++i) {
        const double dx = x[i] - r.center.x;
        const double dy = y[i] - r.center.y;
        count += (dx * dx + dy * dy) <= rr;
      }
      break;
    }
  }
  return count;
}

void count_per_class_avx2(const double* x, const double* y, const std::int32_t* cls,
                          std::size_t n, const Region& r, std::int64_t* acc) {
  std::size_t i = 0;
  const auto scatter = [&](int mask, std::size_t base) {
    while (mask) {
      const int lane = __builtin_ctz(mask);
      ++acc[cls[base + lane]];
      mask &= mask - 1;
    }
  };
  switch (r.kind) {
    case Region::Kind::Interval: {
      const double lo = r.center.x - r.half.x, hi = r.center.x + r.half.x;
      const __m256d vlo = _mm256_set1_pd(lo), vhi = _mm256_set1_pd(hi);
      for (; i + 4 <= n; i += 4)
        scatter(_mm256_movemask_pd(band_mask(_mm256_loadu_pd(x + i), vlo, vhi)), i);
      for (; i < n; ++i)
        if (x[i] >= lo && x[i] <= hi) ++acc[cls[i]];
      break;
    }
    case Region::Kind::Box: {
      const double lx = r.center.x - r.half.x, hx = r.center.x + r.half.x;
      const double ly = r.center.y - r.half.y, hy = r.center.y + r.half.y;
      const __m256d vlx = _mm256_set1_pd(lx), vhx = _mm256_set1_pd(hx);
      const __m256d vly = _mm256_set1_pd(ly), vhy = _mm256_set1_pd(hy);
      for (; i + 4 <= n; i += 4) {
        const __m256d m = _mm256_and_pd(band_mask(_mm256_loadu_pd(x + i), vlx, vhx),
                                        band_mask(_mm256_loadu_pd(y + i), vly, vhy));
        scatter(_mm256_movemask_pd(m), i);
      }
      for (; i < n; ++i)
        if (x[i] >= lx && x[i] <= hx && y[i] >= ly && y[i] <= hy) ++acc[cls[i]];
      break;
    }
    case Region::Kind::Disk: {
      const double rr = r.radius * r.radius;
      const __m256d vcx = _mm256_set1_pd(r.center.x), vcy = _mm256_set1_pd(r.center.y);
      const __m256d vrr = _mm256_set1_pd(rr);
      for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vcx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vcy);
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        scatter(_mm256_movemask_pd(_mm256_cmp_pd(d2, vrr, _CMP_LE_OQ)), i);
      }
      for (; i < n; ++i) {
        const double dx = x[i] - r.center.x;
        const double dy = y[i] - r.center.y;
        if (dx * dx + dy * dy <= rr) ++acc[cls[i]];
      }
      break;
    }
  }
}

}  // namespace tilelab

#endif  // TILELAB_HAVE_AVX2
