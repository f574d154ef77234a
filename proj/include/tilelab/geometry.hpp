#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace tilelab {

// Global incidence tolerance and the coarser snapping grid used to
// deduplicate translations before hashing or set comparison.
inline constexpr double kEps = 1e-9;
inline constexpr double kSnapGrid = 1e-6;

struct Vec {
  double x = 0.0;
  double y = 0.0;
};

inline Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
inline Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
inline Vec operator*(double s, Vec a) { return {s * a.x, s * a.y}; }
inline Vec operator/(Vec a, double s) { return {a.x / s, a.y / s}; }

double norm(Vec a);

using SnapKey = std::pair<std::int64_t, std::int64_t>;

SnapKey snap_key(Vec v, double grid = kSnapGrid);
bool snap_equal(Vec a, Vec b, double grid = kSnapGrid);
// Lexicographic order on snapped coordinates; the canonical tile ordering.
bool snap_less(Vec a, Vec b, double grid = kSnapGrid);

struct Aabb {
  Vec lo, hi;
  bool contains(const Aabb& inner, double slack = 0.0) const;
  bool disjoint(const Aabb& other, double slack = 0.0) const;
};

// Prototile support: an interval for dim==1, a convex CCW polygon for dim==2.
struct TileShape {
  int dim = 1;
  double lo = 0.0, hi = 0.0;       // dim==1
  std::vector<Vec> poly;           // dim==2

  double volume() const;
  Aabb bounds() const;
  bool contains_point(Vec p, double tol = kEps) const;
  // Distance from an interior point to the shape boundary (>=0).
  double interior_depth(Vec p) const;
  TileShape transformed(double scale, Vec offset) const;
};

// f(x) = theta * x + b with theta in (0,1); the branch maps of a rule and
// their path compositions.
struct AffineContraction {
  int dim = 1;
  double theta = 1.0;
  Vec b;

  Vec apply(Vec p) const { return theta * p + b; }
  Vec apply_inverse(Vec p) const { return (p - b) / theta; }
  // this.after(g) = this ∘ g
  AffineContraction after(const AffineContraction& g) const;
};

struct PlacedTile {
  int proto = 0;
  Vec t;                // anchor translation; the tile support is proto's shape + t
  int collared = -1;    // collared class index, -1 when not computed
};

// Dimension of the intersection of two placed shapes:
// -1 disjoint, 0 point contact, 1 segment contact (or 1-d overlap),
// d when interiors overlap on positive volume. overlap_volume receives the
// measure of the interior overlap when non-null.
int intersection_dimension(const TileShape& a, Vec ta, const TileShape& b, Vec tb,
                           double tol = kEps, double* overlap_volume = nullptr);

// Convex helpers (dim==2).
double polygon_area(const std::vector<Vec>& poly);
std::vector<Vec> clip_convex(const std::vector<Vec>& subject, const std::vector<Vec>& clip);
double distance_to_polygon(Vec p, const std::vector<Vec>& poly);
bool polygon_is_convex_ccw(const std::vector<Vec>& poly, double tol = kEps);

}  // namespace tilelab
