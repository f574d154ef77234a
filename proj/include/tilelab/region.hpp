#pragma once

#include <string>

#include "tilelab/geometry.hpp"

namespace tilelab {

// Averaging region: an interval, an axis-aligned box, or a disk. Extents are
// half widths around the center. Membership is closed, compared exactly: the
// hierarchical integrals and the counting kernels must agree to the point.
struct Region {
  enum class Kind { Interval, Box, Disk };
  Kind kind = Kind::Interval;
  Vec center;
  Vec half;
  double radius = 0.0;

  bool contains(Vec p) const;
  double volume(int dim) const;
  // (d-1)-dimensional boundary measure: endpoint count, perimeter, circumference.
  double boundary_measure(int dim) const;
  Aabb aabb() const;
  Region scaled(double t) const;
  Region translated(Vec v) const;
};

// "interval:h", "box:hx,hy", "disk:r", each optionally "@cx[,cy]".
Region region_parse(const std::string& text, int dim);

std::string region_describe(const Region& r, int dim);

}  // namespace tilelab
