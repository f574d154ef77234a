#include "tilelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tilelab {

double norm(Vec a) { return std::hypot(a.x, a.y); }

SnapKey snap_key(Vec v, double grid) {
  return {std::llround(v.x / grid), std::llround(v.y / grid)};
}

bool snap_equal(Vec a, Vec b, double grid) { return snap_key(a, grid) == snap_key(b, grid); }

bool snap_less(Vec a, Vec b, double grid) { return snap_key(a, grid) < snap_key(b, grid); }

bool Aabb::contains(const Aabb& inner, double slack) const {
  return inner.lo.x >= lo.x - slack && inner.hi.x <= hi.x + slack &&
         inner.lo.y >= lo.y - slack && inner.hi.y <= hi.y + slack;
}

bool Aabb::disjoint(const Aabb& other, double slack) const {
  return other.lo.x > hi.x + slack || other.hi.x < lo.x - slack ||
         other.lo.y > hi.y + slack || other.hi.y < lo.y - slack;
}

double TileShape::volume() const {
  if (dim == 1) return hi - lo;
  return polygon_area(poly);
}

Aabb TileShape::bounds() const {
  if (dim == 1) return {{lo, 0.0}, {hi, 0.0}};
  Aabb box{poly.front(), poly.front()};
  for (const Vec& v : poly) {
    box.lo.x = std::min(box.lo.x, v.x);
    box.lo.y = std::min(box.lo.y, v.y);
    box.hi.x = std::max(box.hi.x, v.x);
    box.hi.y = std::max(box.hi.y, v.y);
  }
  return box;
}

bool TileShape::contains_point(Vec p, double tol) const {
  if (dim == 1) return p.x >= lo - tol && p.x <= hi + tol;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec a = poly[i], b = poly[(i + 1) % n];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross < -tol) return false;
  }
  return true;
}

namespace {

double point_segment_distance(Vec p, Vec a, Vec b) {
  const Vec ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0.0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

}  // namespace

double TileShape::interior_depth(Vec p) const {
  if (dim == 1) return std::min(p.x - lo, hi - p.x);
  double depth = std::numeric_limits<double>::infinity();
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i)
    depth = std::min(depth, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
  return contains_point(p, 0.0) ? depth : -depth;
}

TileShape TileShape::transformed(double scale, Vec offset) const {
  TileShape out;
  out.dim = dim;
  if (dim == 1) {
    out.lo = scale * lo + offset.x;
    out.hi = scale * hi + offset.x;
    if (out.lo > out.hi) std::swap(out.lo, out.hi);
  } else {
    out.poly.reserve(poly.size());
    for (const Vec& v : poly) out.poly.push_back(scale * v + offset);
    if (scale < 0) std::reverse(out.poly.begin(), out.poly.end());
  }
  return out;
}

AffineContraction AffineContraction::after(const AffineContraction& g) const {
  return {dim, theta * g.theta, theta * g.b + b};
}

double polygon_area(const std::vector<Vec>& poly) {
  double s = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec a = poly[i], b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

bool polygon_is_convex_ccw(const std::vector<Vec>& poly, double tol) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Vec a = poly[i], b = poly[(i + 1) % n], c = poly[(i + 2) % n];
    const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    if (cross < -tol) return false;
  }
  return polygon_area(poly) > tol;
}

// Sutherland-Hodgman; both polygons convex, clip CCW.
std::vector<Vec> clip_convex(const std::vector<Vec>& subject, const std::vector<Vec>& clip) {
  std::vector<Vec> out = subject;
  const size_t nc = clip.size();
  for (size_t i = 0; i < nc && !out.empty(); ++i) {
    const Vec a = clip[i], b = clip[(i + 1) % nc];
    const Vec edge = b - a;
    std::vector<Vec> in;
    in.swap(out);
    const size_t ni = in.size();
    for (size_t j = 0; j < ni; ++j) {
      const Vec p = in[j], q = in[(j + 1) % ni];
      const double sp = edge.x * (p.y - a.y) - edge.y * (p.x - a.x);
      const double sq = edge.x * (q.y - a.y) - edge.y * (q.x - a.x);
      const bool pin = sp >= 0.0, qin = sq >= 0.0;
      if (pin) out.push_back(p);
      if (pin != qin) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

double distance_to_polygon(Vec p, const std::vector<Vec>& poly) {
  TileShape sh;
  sh.dim = 2;
  sh.poly = poly;
  if (sh.contains_point(p, 0.0)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i)
    d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
  return d;
}

int intersection_dimension(const TileShape& a, Vec ta, const TileShape& b, Vec tb,
                           double tol, double* overlap_volume) {
  if (overlap_volume) *overlap_volume = 0.0;
  if (a.dim != b.dim) return -1;
  if (a.dim == 1) {
    const double lo = std::max(a.lo + ta.x, b.lo + tb.x);
    const double hi = std::min(a.hi + ta.x, b.hi + tb.x);
    const double ov = hi - lo;
    if (ov > tol) {
      if (overlap_volume) *overlap_volume = ov;
      return 1;
    }
    return ov > -tol ? 0 : -1;
  }

  const TileShape pa = a.transformed(1.0, ta);
  const TileShape pb = b.transformed(1.0, tb);
  if (pa.bounds().disjoint(pb.bounds(), tol)) return -1;

  const std::vector<Vec> inter = clip_convex(pa.poly, pb.poly);
  const double area = inter.empty() ? 0.0 : polygon_area(inter);
  if (area > tol) {
    if (overlap_volume) *overlap_volume = area;
    return 2;
  }

  // Interiors do not overlap; classify the contact set by its diameter.
  std::vector<Vec> contact;
  for (const Vec& v : pa.poly)
    if (distance_to_polygon(v, pb.poly) <= tol) contact.push_back(v);
  for (const Vec& v : pb.poly)
    if (distance_to_polygon(v, pa.poly) <= tol) contact.push_back(v);
  for (const Vec& v : inter) contact.push_back(v);
  if (contact.empty()) return -1;
  double diam = 0.0;
  for (size_t i = 0; i < contact.size(); ++i)
    for (size_t j = i + 1; j < contact.size(); ++j)
      diam = std::max(diam, norm(contact[i] - contact[j]));
  return diam > kSnapGrid ? 1 : 0;
}

}  // namespace tilelab
