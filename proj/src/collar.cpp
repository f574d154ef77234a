#include "tilelab/collar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tilelab {

namespace {

// Largest anchor-to-support-point distance over the prototiles. Two placed
// tiles can only touch when their anchors are within twice this radius.
double max_extent(const TypeHFamily& fam) {
  double m = 0.0;
  for (const TileShape& s : fam.prototiles) {
    if (s.dim == 1) {
      m = std::max({m, std::abs(s.lo), std::abs(s.hi)});
    } else {
      for (const Vec& v : s.poly) m = std::max(m, norm(v));
    }
  }
  return m;
}

std::vector<Vec> shape_points(const TileShape& s, Vec t) {
  if (s.dim == 1) return {Vec{s.lo, 0} + t, Vec{s.hi, 0} + t};
  std::vector<Vec> pts;
  pts.reserve(s.poly.size());
  for (const Vec& v : s.poly) pts.push_back(v + t);
  return pts;
}

std::uint64_t bucket_key(std::int64_t cx, std::int64_t cy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
}

struct Inflated {
  std::vector<PlacedTile> tiles;
  std::vector<int> center_children;  // indices, file order of branches_into
};

// One-step blowup of a collared patch (center at the origin plus its
// neighbors), rescaled so the children are unit tiles again.
Inflated inflate_class(const TypeHFamily& fam, int rule_idx, const CollaredClass& cls) {
  const SubstitutionRule& rule = fam.rules[rule_idx];
  const double inv = 1.0 / rule.theta;
  Inflated out;
  const auto expand = [&](int proto, Vec t, bool center) {
    for (const int bi : rule.branches_into[proto]) {
      const Branch& b = rule.branches[bi];
      if (center) out.center_children.push_back(static_cast<int>(out.tiles.size()));
      out.tiles.push_back(PlacedTile{b.source, inv * (t + b.offset), -1});
    }
  };
  expand(cls.center, Vec{0, 0}, true);
  for (const auto& [v, p] : cls.neighbors) expand(p, v, false);
  return out;
}

}  // namespace

bool operator==(const CollaredClass& a, const CollaredClass& b) {
  return a.center == b.center && a.keys == b.keys;
}

bool operator<(const CollaredClass& a, const CollaredClass& b) {
  if (a.center != b.center) return a.center < b.center;
  return a.keys < b.keys;
}

PatchIndex::PatchIndex(const TypeHFamily& fam, const std::vector<PlacedTile>& tiles)
    : fam_(fam), tiles_(tiles) {
  cell_ = std::max(max_extent(fam), 1e-6);
  for (size_t i = 0; i < tiles_.size(); ++i) {
    const std::int64_t cx = static_cast<std::int64_t>(std::floor(tiles_[i].t.x / cell_));
    const std::int64_t cy = static_cast<std::int64_t>(std::floor(tiles_[i].t.y / cell_));
    buckets_[bucket_key(cx, cy)].push_back(static_cast<int>(i));
  }
}

std::vector<int> PatchIndex::neighbors_of(int idx) const {
  const PlacedTile& me = tiles_[idx];
  const TileShape& my_shape = fam_.prototiles[me.proto];
  const std::int64_t cx = static_cast<std::int64_t>(std::floor(me.t.x / cell_));
  const std::int64_t cy = static_cast<std::int64_t>(std::floor(me.t.y / cell_));
  std::vector<int> out;
  for (std::int64_t dx = -2; dx <= 2; ++dx) {
    for (std::int64_t dy = -2; dy <= 2; ++dy) {
      const auto it = buckets_.find(bucket_key(cx + dx, cy + dy));
      if (it == buckets_.end()) continue;
      for (const int j : it->second) {
        if (j == idx) continue;
        const PlacedTile& other = tiles_[j];
        if (intersection_dimension(my_shape, me.t, fam_.prototiles[other.proto], other.t) >= 0)
          out.push_back(j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

CollaredClass PatchIndex::collar_of(int idx) const {
  const PlacedTile& me = tiles_[idx];
  struct Entry {
    SnapKey key;
    int proto;
    Vec off;
  };
  std::vector<Entry> entries;
  for (const int j : neighbors_of(idx)) {
    const Vec off = tiles_[j].t - me.t;
    entries.push_back(Entry{snap_key(off), tiles_[j].proto, off});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.key, a.proto) < std::tie(b.key, b.proto);
  });
  CollaredClass cls;
  cls.center = me.proto;
  for (const Entry& e : entries) {
    cls.keys.emplace_back(e.key, e.proto);
    cls.neighbors.emplace_back(e.off, e.proto);
  }
  return cls;
}

int PatchIndex::tile_at(Vec t) const {
  const std::int64_t cx = static_cast<std::int64_t>(std::floor(t.x / cell_));
  const std::int64_t cy = static_cast<std::int64_t>(std::floor(t.y / cell_));
  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      const auto it = buckets_.find(bucket_key(cx + dx, cy + dy));
      if (it == buckets_.end()) continue;
      for (const int j : it->second)
        if (snap_equal(tiles_[j].t, t)) return j;
    }
  }
  return -1;
}

std::vector<std::optional<CollaredClass>> collar_patch(const TypeHFamily& fam,
                                                       const std::vector<PlacedTile>& tiles,
                                                       const TileShape& support) {
  const PatchIndex idx(fam, tiles);
  const double margin = 2 * max_extent(fam) + kSnapGrid;
  std::vector<std::optional<CollaredClass>> out(tiles.size());
  for (size_t i = 0; i < tiles.size(); ++i) {
    double depth = std::numeric_limits<double>::infinity();
    for (const Vec& p : shape_points(fam.prototiles[tiles[i].proto], tiles[i].t))
      depth = std::min(depth, support.interior_depth(p));
    if (depth >= margin) out[i] = idx.collar_of(static_cast<int>(i));
  }
  return out;
}

int CollaredTileSet::find(const CollaredClass& c) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), c);
  if (it == classes.end() || !(*it == c)) return -1;
  return static_cast<int>(it - classes.begin());
}

int CollaredTileSet::require(const CollaredClass& c) const {
  const int id = find(c);
  if (id < 0) {
    std::ostringstream msg;
    msg << "collared class set is not closed: missing class with center "
        << c.center << " and " << c.keys.size() << " neighbors";
    throw std::runtime_error(msg.str());
  }
  return id;
}

CollaredTileSet collared_tiles(const TypeHFamily& fam, const SequenceLaw& law,
                               std::uint64_t seed, const CollarOptions& opts) {
  std::set<int> support;
  if (law.kind == SequenceLaw::Kind::Word) {
    for (const int s : law.word) support.insert(s);
  } else {
    for (size_t i = 0; i < law.probs.size(); ++i)
      if (law.probs[i] > 0) support.insert(static_cast<int>(i));
  }
  if (support.empty()) throw std::runtime_error("sequence law has empty support");

  std::set<CollaredClass> seen;

  const int words = law.is_deterministic() ? 1 : opts.sample_words;
  for (int w = 0; w < words; ++w) {
    const std::vector<int> word = law.realize(64, seed + static_cast<std::uint64_t>(w));
    auto h = std::make_shared<SupertileHierarchy>(fam, word);
    PathSpec spec;
    spec.policy = PathPolicy::Cyclic;
    const PathRealization path = realize_path(fam, word, spec, h->depth_limit());
    int depth = 0;
    while (depth < h->depth_limit()) {
      const SupertilePrototype& p = h->proto(depth + 1, path.vertices[depth + 1]);
      std::int64_t total = 0;
      for (const std::int64_t c : p.leaf_counts) total += c;
      if (total > opts.seed_leaf_cap) break;
      ++depth;
    }
    const Approximant ap = approximant(h, spec, depth);
    const std::vector<PlacedTile> tiles = ap.flatten();
    const TileShape sup = h->support_shape(depth, ap.root_type, ap.root_t);
    for (const auto& cls : collar_patch(fam, tiles, sup))
      if (cls) seen.insert(*cls);
  }
  if (seen.empty()) throw std::runtime_error("seed patch produced no interior collars");

  // Close under one-step substitution by every rule in the law's support;
  // draining the queue is the stability certificate.
  std::vector<CollaredClass> queue(seen.begin(), seen.end());
  size_t qi = 0;
  while (qi < queue.size()) {
    const CollaredClass cls = queue[qi++];
    for (const int r : support) {
      const Inflated inf = inflate_class(fam, r, cls);
      const PatchIndex idx(fam, inf.tiles);
      for (const int ci : inf.center_children) {
        CollaredClass child = idx.collar_of(ci);
        if (seen.insert(child).second) queue.push_back(std::move(child));
      }
    }
    if (static_cast<int>(seen.size()) > opts.class_cap)
      throw std::runtime_error("collared class cap exceeded");
  }

  CollaredTileSet out;
  out.classes.assign(seen.begin(), seen.end());
  out.support_rules.assign(support.begin(), support.end());
  return out;
}

std::vector<int> collared_children(const TypeHFamily& fam, int rule, const CollaredTileSet& set,
                                   int cls) {
  const Inflated inf = inflate_class(fam, rule, set.classes[cls]);
  const PatchIndex idx(fam, inf.tiles);
  std::vector<int> out;
  out.reserve(inf.center_children.size());
  for (const int ci : inf.center_children) out.push_back(set.require(idx.collar_of(ci)));
  return out;
}

IntMatrix collared_matrix(const TypeHFamily& fam, int rule, const CollaredTileSet& set) {
  const int m = set.count();
  IntMatrix g(m, std::vector<std::int64_t>(m, 0));
  for (int i = 0; i < m; ++i)
    for (const int j : collared_children(fam, rule, set, i)) ++g[j][i];
  return g;
}

CollaredSystem build_collared_system(const TypeHFamily& fam, const SequenceLaw& law,
                                     std::uint64_t seed, const CollarOptions& opts) {
  CollaredSystem sys;
  sys.set = collared_tiles(fam, law, seed, opts);
  const int m = sys.set.count();
  sys.children.assign(fam.rule_count(), {});
  sys.matrices.assign(fam.rule_count(), IntMatrix(m, std::vector<std::int64_t>(m, 0)));
  for (const int r : sys.set.support_rules) {
    sys.children[r].resize(m);
    for (int i = 0; i < m; ++i) {
      sys.children[r][i] = collared_children(fam, r, sys.set, i);
      for (const int j : sys.children[r][i]) ++sys.matrices[r][j][i];
    }
  }
  return sys;
}

std::string collared_quotient_mismatch(const TypeHFamily& fam, const CollaredTileSet& set,
                                       const std::vector<IntMatrix>& matrices) {
  for (const int r : set.support_rules) {
    const IntMatrix plain = transition_matrix(fam, r);
    const IntMatrix& g = matrices[r];
    for (int i = 0; i < set.count(); ++i) {
      std::vector<std::int64_t> by_center(fam.prototile_count(), 0);
      for (int j = 0; j < set.count(); ++j) by_center[set.classes[j].center] += g[j][i];
      for (int q = 0; q < fam.prototile_count(); ++q) {
        if (by_center[q] != plain[q][set.classes[i].center]) {
          std::ostringstream msg;
          msg << "rule " << fam.rules[r].id << ": class " << i << " (center "
              << fam.prototile_ids[set.classes[i].center] << ") maps " << by_center[q]
              << " children onto center " << fam.prototile_ids[q] << ", transition matrix says "
              << plain[q][set.classes[i].center];
          return msg.str();
        }
      }
    }
  }
  return std::string();
}

}  // namespace tilelab
