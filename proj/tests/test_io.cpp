#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tilelab/bratteli.hpp"
#include "tilelab/report.hpp"

using namespace tilelab;

namespace {

RunManifest pinned_manifest() {
  RunManifest m;
  m.command = "expand";
  m.family_hash = "00deadbeef00cafe";
  m.seed = 7;
  m.parameters = ojson{{"depth", 3}, {"family", "fixtures/four1d.toml"}};
  m.timestamp = "2026-01-02T03:04:05Z";
  return m;
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = 0; (pos = text.find(needle, pos)) != std::string::npos; ++n)
    pos += needle.size();
  return n;
}

std::vector<PlacedTile> expand_tiles(const TypeHFamily& fam, const std::vector<int>& word,
                                     int depth) {
  auto h = std::make_shared<SupertileHierarchy>(fam, word);
  const PathSpec spec{0, {}, PathPolicy::SeededRandom, 1};
  return approximant(h, spec, depth).flatten();
}

}  // namespace

TEST_CASE("fnv1a64 matches the published vectors") {
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ULL);
}

TEST_CASE("timestamps honor SOURCE_DATE_EPOCH") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  CHECK(utc_timestamp() == "1970-01-01T00:00:00Z");
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  CHECK(utc_timestamp() == "2023-11-14T22:13:20Z");
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("equal manifests give byte identical artifacts") {
  const TypeHFamily fam = load_family(oracles::fixture("four1d.toml"));
  const std::vector<PlacedTile> tiles = expand_tiles(fam, {0, 0, 0, 0}, 3);
  const RunManifest m = pinned_manifest();

  CHECK(patch_jsonl(tiles, 1, m) == patch_jsonl(tiles, 1, m));
  CHECK(render_svg(tiles, fam, false, m) == render_svg(tiles, fam, false, m));
  CHECK(manifest_json(m).dump() == manifest_json(m).dump());

  RunManifest other = m;
  other.seed = 8;
  CHECK(patch_jsonl(tiles, 1, m) != patch_jsonl(tiles, 1, other));
}

TEST_CASE("patch jsonl round trips tiles in snapped order") {
  const TypeHFamily fam = load_family(oracles::fixture("four1d.toml"));
  std::vector<PlacedTile> tiles = expand_tiles(fam, {0, 0, 0}, 3);
  REQUIRE(tiles.size() == 64);
  tiles[0].collared = 5;
  std::swap(tiles[0], tiles[40]);

  const RunManifest m = pinned_manifest();
  const std::string text = patch_jsonl(tiles, 1, m);
  CHECK(count_occurrences(text, "\n") == 65);

  const LoadedPatch patch = parse_patch_jsonl(text);
  CHECK(patch.dim == 1);
  CHECK(patch.manifest["command"] == "expand");
  CHECK(patch.manifest["seed"] == 7);
  REQUIRE(patch.tiles.size() == tiles.size());
  for (std::size_t i = 1; i < patch.tiles.size(); ++i)
    CHECK(snap_less(patch.tiles[i - 1].t, patch.tiles[i].t));

  sort_tiles(tiles);
  int collared_seen = 0;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    CHECK(patch.tiles[i].proto == tiles[i].proto);
    CHECK(snap_equal(patch.tiles[i].t, tiles[i].t));
    if (patch.tiles[i].collared >= 0) {
      ++collared_seen;
      CHECK(patch.tiles[i].collared == 5);
    }
  }
  CHECK(collared_seen == 1);

  CHECK_THROWS_WITH_AS(parse_patch_jsonl("{\"proto\":0}\n"), doctest::Contains("manifest"),
                       std::runtime_error);
}

TEST_CASE("svg rendering pins polygon count viewbox and palette") {
  const RunManifest m = pinned_manifest();

  SUBCASE("single unit square") {
    TypeHFamily fam;
    fam.name = "unit";
    fam.dim = 2;
    fam.prototile_ids = {"sq"};
    TileShape s;
    s.dim = 2;
    s.poly = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
    fam.prototiles = {s};

    const std::string svg = render_svg({PlacedTile{0, {0.0, 0.0}, -1}}, fam, false, m);
    CHECK(count_occurrences(svg, "<polygon") == 1);
    CHECK(svg.find("viewBox=\"-0.500000 -0.500000 1.000000 1.000000\"") != std::string::npos);
    CHECK(svg.find("fill=\"#4e79a7\"") != std::string::npos);
    CHECK(svg.find("<!-- manifest: {\"command\":\"expand\"") != std::string::npos);

    CHECK_THROWS_WITH_AS(render_svg({}, fam, false, m), doctest::Contains("empty"),
                         std::runtime_error);
  }

  SUBCASE("one dimensional strip") {
    const TypeHFamily fam = load_family(oracles::fixture("four1d.toml"));
    const std::vector<PlacedTile> tiles = expand_tiles(fam, {0, 0, 0}, 3);
    const std::string svg = render_svg(tiles, fam, false, m);
    CHECK(count_occurrences(svg, "<polygon") == 64);
    // every tile renders as a unit-width, unit-height rectangle
    CHECK(svg.find("1.000000\">") != std::string::npos);
    CHECK(count_occurrences(svg, ",0.000000 ") == 2 * 64);
  }

  SUBCASE("product patch uses one fill per prototile") {
    const TypeHFamily fam = load_family(oracles::fixture("prod2d.toml"));
    const std::vector<PlacedTile> tiles = expand_tiles(fam, {0, 0}, 2);
    REQUIRE(tiles.size() == 16 * 16);
    const std::string svg = render_svg(tiles, fam, false, m);
    CHECK(count_occurrences(svg, "<polygon") == 16 * 16);
    int fills = 0;
    for (const char* color : {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2"})
      if (svg.find(color) != std::string::npos) ++fills;
    CHECK(fills == 4);
    CHECK(svg.find("#59a14f") == std::string::npos);
  }

  SUBCASE("collared classes pick the fill unless proto coloring is forced") {
    const TypeHFamily fam = load_family(oracles::fixture("four1d.toml"));
    const std::vector<PlacedTile> tiles = {PlacedTile{0, {0.0, 0.0}, 7}};
    CHECK(render_svg(tiles, fam, false, m).find("#ff9da7") != std::string::npos);
    CHECK(render_svg(tiles, fam, true, m).find("#4e79a7") != std::string::npos);
  }
}

TEST_CASE("deviation csv leads with the manifest and the fixed header") {
  DeviationReport rep;
  DeviationPoint p;
  p.T = 4.0;
  p.value = 2.0;
  p.anchors = 8;
  p.top_level = 1;
  p.level_totals = {3, 1};
  rep.points.push_back(p);
  p.T = 8.0;
  p.value = 0.0;
  p.level_totals = {3, 3};
  rep.points.push_back(p);

  const std::string csv = deviation_csv(rep, pinned_manifest());
  REQUIRE(csv.rfind("# {\"command\":\"expand\"", 0) == 0);
  CHECK(csv.find("\nT,I,logT,logAbsI,level_counts_json\n") != std::string::npos);
  CHECK(csv.find("\n4,2,") != std::string::npos);
  CHECK(csv.find(",\"[3,1]\"\n") != std::string::npos);
  // a vanished integral keeps the grid line, with an explicit -inf marker
  CHECK(csv.find("\n8,0,") != std::string::npos);
  CHECK(csv.find(",-inf,\"[3,3]\"\n") != std::string::npos);
  CHECK(count_occurrences(csv, "\n") == 4);
}

TEST_CASE("shipped product fixture equals the library construction") {
  const TypeHFamily four = load_family(oracles::fixture("four1d.toml"));
  TypeHFamily prod = product_family_2d(four, four);
  prod.name = "prod2d";
  const TypeHFamily shipped = load_family(oracles::fixture("prod2d.toml"));
  CHECK(family_equal(prod, shipped));
}
