#include "tilelab/region.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tilelab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    try {
      out.push_back(std::stod(text.substr(pos, next - pos)));
    } catch (const std::exception&) {
      throw std::runtime_error("bad number in region spec: " + text);
    }
    pos = next + 1;
  }
  return out;
}

}  // namespace

bool Region::contains(Vec p) const {
  switch (kind) {
    case Kind::Interval:
      return p.x >= center.x - half.x && p.x <= center.x + half.x;
    case Kind::Box:
      return p.x >= center.x - half.x && p.x <= center.x + half.x &&
             p.y >= center.y - half.y && p.y <= center.y + half.y;
    case Kind::Disk: {
      const double dx = p.x - center.x;
      const double dy = p.y - center.y;
      return dx * dx + dy * dy <= radius * radius;
    }
  }
  return false;
}

double Region::volume(int dim) const {
  switch (kind) {
    case Kind::Interval:
      return 2 * half.x;
    case Kind::Box:
      return 4 * half.x * half.y;
    case Kind::Disk:
      return kPi * radius * radius;
  }
  return 0.0;
  (void)dim;
}

double Region::boundary_measure(int dim) const {
  switch (kind) {
    case Kind::Interval:
      return 2.0;
    case Kind::Box:
      return 4 * (half.x + half.y);
    case Kind::Disk:
      return 2 * kPi * radius;
  }
  return 0.0;
  (void)dim;
}

Aabb Region::aabb() const {
  if (kind == Kind::Disk)
    return {center - Vec{radius, radius}, center + Vec{radius, radius}};
  if (kind == Kind::Interval) return {{center.x - half.x, 0}, {center.x + half.x, 0}};
  return {center - half, center + half};
}

Region Region::scaled(double t) const {
  Region out = *this;
  out.center = t * center;
  out.half = t * half;
  out.radius = t * radius;
  return out;
}

Region Region::translated(Vec v) const {
  Region out = *this;
  out.center = center + v;
  return out;
}

Region region_parse(const std::string& text, int dim) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("region spec needs kind:params, got " + text);
  const std::string kind = text.substr(0, colon);
  std::string params = text.substr(colon + 1);
  Vec center;
  const std::size_t at = params.find('@');
  if (at != std::string::npos) {
    const std::vector<double> c = parse_numbers(params.substr(at + 1));
    if (c.empty() || c.size() > 2) throw std::runtime_error("bad region center");
    center.x = c[0];
    center.y = c.size() > 1 ? c[1] : 0.0;
    params = params.substr(0, at);
  }
  const std::vector<double> nums = parse_numbers(params);
  Region out;
  out.center = center;
  if (kind == "interval") {
    if (dim != 1) throw std::runtime_error("interval region needs a 1-d family");
    if (nums.size() != 1 || nums[0] <= 0) throw std::runtime_error("interval:h needs h > 0");
    out.kind = Region::Kind::Interval;
    out.half = {nums[0], 0};
  } else if (kind == "box") {
    if (dim != 2) throw std::runtime_error("box region needs a 2-d family");
    if (nums.size() != 2 || nums[0] <= 0 || nums[1] <= 0)
      throw std::runtime_error("box:hx,hy needs positive extents");
    out.kind = Region::Kind::Box;
    out.half = {nums[0], nums[1]};
  } else if (kind == "disk") {
    if (dim != 2) throw std::runtime_error("disk region needs a 2-d family");
    if (nums.size() != 1 || nums[0] <= 0) throw std::runtime_error("disk:r needs r > 0");
    out.kind = Region::Kind::Disk;
    out.radius = nums[0];
  } else {
    throw std::runtime_error("unknown region kind: " + kind);
  }
  return out;
}

std::string region_describe(const Region& r, int dim) {
  std::ostringstream out;
  switch (r.kind) {
    case Region::Kind::Interval:
      out << "interval:" << r.half.x;
      break;
    case Region::Kind::Box:
      out << "box:" << r.half.x << "," << r.half.y;
      break;
    case Region::Kind::Disk:
      out << "disk:" << r.radius;
      break;
  }
  out << "@" << r.center.x;
  if (dim == 2) out << "," << r.center.y;
  return out.str();
}

}  // namespace tilelab
