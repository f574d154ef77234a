#include "tilelab/kernels.hpp"

namespace tilelab {

std::int64_t count_in_region_scalar(const double* x, const double* y, std::size_t n,
                                    const Region& r) {
  std::int64_t count = 0;
  switch (r.kind) {
    case Region::Kind::Interval: {
      const double lo = r.center.x - r.half.x, hi = r.center.x + r.half.x;
      for (std::size_t i = 0; i < n; ++i) count += (x[i] >= lo) & (x[i] <= hi);
      break;
    }
    case Region::Kind::Box: {
      const double lx = r.center.x - r.half.x, hx = r.center.x + r.half.x;
      const double ly = r.center.y - r.half.y, hy = r.center.y + r.half.y;
      for (std::size_t i = 0; i < n; ++i)
        count += (x[i] >= lx) & (x[i] <= hx) & (y[i] >= ly) & (y[i] <= hy);
      break;
    }
    case Region::Kind::Disk: {
      const double rr = r.radius * r.radius;
      for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - r.center.x;
        const double dy = y[i] - r.center.y;
        count += (dx * dx + dy * dy) <= rr;
      }
      break;
    }
  }
  return count;
}

void count_per_class_scalar(const double* x, const double* y, const std::int32_t* cls,
                            std::size_t n, const Region& r, std::int64_t* acc) {
  switch (r.kind) {
    case Region::Kind::Interval: {
      const double lo = r.center.x - r.half.x, hi = r.center.x + r.half.x;
      for (std::size_t i = 0; i < n; ++i)
        if (x[i] >= lo && x[i] <= hi) ++acc[cls[i]];
      break;
    }
    case Region::Kind::Box: {
      const double lx = r.center.x - r.half.x, hx = r.center.x + r.half.x;
      const double ly = r.center.y - r.half.y, hy = r.center.y + r.half.y;
      for (std::size_t i = 0; i < n; ++i)
        if (x[i] >= lx && x[i] <= hx && y[i] >= ly && y[i] <= hy) ++acc[cls[i]];
      break;
    }
    case Region::Kind::Disk: {
      const double rr = r.radius * r.radius;
      for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - r.center.x;
        const double dy = y[i] - r.center.y;
        if (dx * dx + dy * dy <= rr) ++acc[cls[i]];
      }
      break;
    }
  }
}

}  // namespace tilelab
