#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include "tilelab/kernels.hpp"
#include "tilelab/region.hpp"
#include "tilelab/rng.hpp"

using namespace tilelab;

namespace {

struct Cloud {
  std::vector<double> x, y;
  std::vector<std::int32_t> cls;
};

Cloud random_cloud(std::size_t n, int classes, std::uint64_t seed, bool grid_aligned) {
  Cloud c;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    if (grid_aligned) {
      // Integer anchors: many land exactly on region boundaries.
      c.x.push_back(double(int(rng.below(21))) - 10.0);
      c.y.push_back(double(int(rng.below(21))) - 10.0);
    } else {
      c.x.push_back(rng.uniform() * 20 - 10);
      c.y.push_back(rng.uniform() * 20 - 10);
    }
    c.cls.push_back(static_cast<std::int32_t>(rng.below(classes)));
  }
  return c;
}

std::vector<Region> probe_regions() {
  std::vector<Region> out;
  Region interval;
  interval.kind = Region::Kind::Interval;
  interval.center = {0.5, 0};
  interval.half = {4.0, 0};
  out.push_back(interval);
  Region box;
  box.kind = Region::Kind::Box;
  box.center = {-1, 2};
  box.half = {5, 3};
  out.push_back(box);
  Region disk;
  disk.kind = Region::Kind::Disk;
  disk.center = {1, -1};
  disk.radius = 5.0;
  out.push_back(disk);
  return out;
}

}  // namespace

TEST_CASE("region membership, volume and scaling") {
  const Region box = region_parse("box:2,1@1,0", 2);
  CHECK(box.contains({3.0, 1.0}));   // corner, closed
  CHECK(box.contains({-1.0, 0.0}));  // edge
  CHECK(!box.contains({3.0001, 0.0}));
  CHECK(box.volume(2) == doctest::Approx(8.0));
  CHECK(box.boundary_measure(2) == doctest::Approx(12.0));
  const Region big = box.scaled(3.0);
  CHECK(big.half.x == doctest::Approx(6.0));
  CHECK(big.center.x == doctest::Approx(3.0));
  CHECK(big.volume(2) == doctest::Approx(72.0));

  const Region disk = region_parse("disk:2", 2);
  CHECK(disk.contains({2.0, 0.0}));
  CHECK(!disk.contains({2.0, 0.1}));
  CHECK(disk.volume(2) == doctest::Approx(4 * 3.14159265358979323846));

  const Region iv = region_parse("interval:1.5@-2", 1);
  CHECK(iv.contains({-3.5, 0}));
  CHECK(!iv.contains({-3.5000001, 0}));
  CHECK(iv.volume(1) == doctest::Approx(3.0));
  CHECK(iv.boundary_measure(1) == doctest::Approx(2.0));

  CHECK_THROWS(region_parse("interval:1", 2));
  CHECK_THROWS(region_parse("box:1,1", 1));
  CHECK_THROWS(region_parse("blob:1", 2));
  CHECK_THROWS(region_parse("disk:-1", 2));
  const Region round = region_parse(region_describe(disk, 2), 2);
  CHECK(round.radius == disk.radius);
}

TEST_CASE("scalar and avx2 kernels agree exactly") {
  for (const bool aligned : {false, true}) {
    for (std::size_t n : {0ul, 1ul, 3ul, 4ul, 7ul, 64ul, 1001ul, 20000ul}) {
      const Cloud c = random_cloud(n, 5, 99 + n + aligned, aligned);
      for (const Region& r : probe_regions()) {
        const std::int64_t want = count_in_region_scalar(c.x.data(), c.y.data(), n, r);
        CHECK(count_in_region_avx2(c.x.data(), c.y.data(), n, r) == want);
        CHECK(count_in_region(c.x.data(), c.y.data(), n, r) == want);

        std::vector<std::int64_t> a(5, 0), b(5, 0), d(5, 0);
        count_per_class_scalar(c.x.data(), c.y.data(), c.cls.data(), n, r, a.data());
        count_per_class_avx2(c.x.data(), c.y.data(), c.cls.data(), n, r, b.data());
        count_per_class(c.x.data(), c.y.data(), c.cls.data(), n, r, d.data());
        CHECK(a == b);
        CHECK(a == d);
        std::int64_t sum = 0;
        for (const std::int64_t v : a) sum += v;
        CHECK(sum == want);
      }
    }
  }
}

TEST_CASE("counts match the region predicate") {
  const Cloud c = random_cloud(5000, 3, 7, true);
  for (const Region& r : probe_regions()) {
    std::int64_t manual = 0;
    for (std::size_t i = 0; i < c.x.size(); ++i)
      if (r.contains({c.x[i], c.y[i]})) ++manual;
    CHECK(count_in_region(c.x.data(), c.y.data(), c.x.size(), r) == manual);
  }
}

TEST_CASE("backend reporting is consistent") {
  const std::string backend = kernel_backend();
  CHECK((backend == "avx2" || backend == "scalar"));
  CHECK(simd_active() == (backend == "avx2"));
  if (!kernels_compiled_avx2()) CHECK(backend == "scalar");
}
