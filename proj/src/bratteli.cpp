#include "tilelab/bratteli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tilelab {

SequenceLaw SequenceLaw::parse(const std::string& text, int rule_count) {
  const size_t colon = text.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("law must look like fixed:1, periodic:12 or bernoulli:0.5,0.5");
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  if (body.empty()) throw std::runtime_error("law '" + text + "' has no body");
  if (kind == "fixed" || kind == "periodic") {
    std::vector<int> word;
    for (const char c : body) {
      if (c < '1' || c > '9') throw std::runtime_error("law word must use digits 1..9");
      const int sym = c - '1';
      if (sym >= rule_count)
        throw std::runtime_error("law symbol " + std::string(1, c) + " exceeds rule count");
      word.push_back(sym);
    }
    return fixed(std::move(word));
  }
  if (kind == "bernoulli") {
    std::vector<double> probs;
    size_t pos = 0;
    while (pos <= body.size()) {
      const size_t comma = body.find(',', pos);
      const std::string tok = body.substr(pos, comma == std::string::npos ? comma : comma - pos);
      try {
        probs.push_back(std::stod(tok));
      } catch (...) {
        throw std::runtime_error("bad probability '" + tok + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (static_cast<int>(probs.size()) != rule_count)
      throw std::runtime_error("bernoulli law needs one probability per rule");
    double sum = 0.0;
    for (const double p : probs) {
      if (p < 0.0) throw std::runtime_error("negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("probabilities must sum to 1");
    return bernoulli(std::move(probs));
  }
  throw std::runtime_error("unknown law kind '" + kind + "'");
}

std::vector<int> SequenceLaw::realize(int length, std::uint64_t seed) const {
  std::vector<int> out;
  out.reserve(length);
  if (kind == Kind::Word) {
    for (int i = 0; i < length; ++i) out.push_back(word[i % word.size()]);
    return out;
  }
  Rng rng(seed);
  for (int i = 0; i < length; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    int pick = static_cast<int>(probs.size()) - 1;
    for (size_t r = 0; r < probs.size(); ++r) {
      acc += probs[r];
      if (u < acc) {
        pick = static_cast<int>(r);
        break;
      }
    }
    out.push_back(pick);
  }
  return out;
}

PathPolicy path_policy_parse(const std::string& text) {
  if (text == "leftmost") return PathPolicy::Leftmost;
  if (text == "random") return PathPolicy::SeededRandom;
  if (text == "cyclic") return PathPolicy::Cyclic;
  throw std::runtime_error("unknown path policy '" + text + "' (leftmost|random|cyclic)");
}

std::vector<std::vector<int>> branches_from(const SubstitutionRule& rule, int prototile_count) {
  std::vector<std::vector<int>> out(prototile_count);
  for (size_t bi = 0; bi < rule.branches.size(); ++bi)
    out[rule.branches[bi].source].push_back(static_cast<int>(bi));
  return out;
}

PathRealization realize_path(const TypeHFamily& fam, const std::vector<int>& word,
                             const PathSpec& spec, int depth) {
  if (depth > static_cast<int>(word.size()))
    throw std::runtime_error("path depth exceeds word length");
  if (spec.start < 0 || spec.start >= fam.prototile_count())
    throw std::runtime_error("path start prototile out of range");
  PathRealization path;
  path.vertices.push_back(spec.start);
  Rng rng(spec.seed);
  for (int level = 1; level <= depth; ++level) {
    const int rule_idx = word[level - 1];
    const SubstitutionRule& rule = fam.rules[rule_idx];
    const std::vector<std::vector<int>> from = branches_from(rule, fam.prototile_count());
    const std::vector<int>& options = from[path.vertices.back()];
    if (options.empty())
      throw std::runtime_error("no branch out of prototile '" +
                               fam.prototile_ids[path.vertices.back()] + "' under rule '" +
                               rule.id + "'");
    int pick;
    if (level - 1 < static_cast<int>(spec.explicit_edges.size())) {
      pick = spec.explicit_edges[level - 1];
      if (pick < 0 || pick >= static_cast<int>(options.size()))
        throw std::runtime_error("explicit edge index out of range at level " +
                                 std::to_string(level));
    } else {
      switch (spec.policy) {
        case PathPolicy::Leftmost: {
          pick = 0;
          for (size_t i = 1; i < options.size(); ++i)
            if (snap_less(rule.branches[options[i]].offset, rule.branches[options[pick]].offset))
              pick = static_cast<int>(i);
          break;
        }
        case PathPolicy::Cyclic:
          pick = (level - 1) % static_cast<int>(options.size());
          break;
        case PathPolicy::SeededRandom:
          pick = static_cast<int>(rng.below(options.size()));
          break;
        default:
          pick = 0;
      }
    }
    const int branch = options[pick];
    path.edges.push_back(branch);
    path.vertices.push_back(rule.branches[branch].target);
  }
  return path;
}

AffineContraction compose_path_map(const TypeHFamily& fam, const std::vector<int>& word,
                                   const PathRealization& path, int upto) {
  const int k = upto < 0 ? static_cast<int>(path.edges.size()) : upto;
  AffineContraction f{fam.dim, 1.0, {0.0, 0.0}};
  for (int l = 0; l < k; ++l) {
    const SubstitutionRule& rule = fam.rules[word[l]];
    const Branch& b = rule.branches[path.edges[l]];
    f = AffineContraction{fam.dim, rule.theta, b.offset}.after(f);
  }
  return f;
}

bool is_boundary_path(const TypeHFamily& fam, const std::vector<int>& word,
                      const PathRealization& path, int level, double margin) {
  const AffineContraction f = compose_path_map(fam, word, path, level);
  const TileShape img = fam.prototiles[path.vertices[0]].transformed(f.theta, f.b);
  const TileShape& range = fam.prototiles[path.vertices[level]];
  if (fam.dim == 1) return std::min(img.lo - range.lo, range.hi - img.hi) <= margin;
  double depth = std::numeric_limits<double>::infinity();
  for (const Vec& v : img.poly) depth = std::min(depth, range.interior_depth(v));
  return depth <= margin;
}

SupertileHierarchy::SupertileHierarchy(const TypeHFamily& fam, std::vector<int> word)
    : fam_(fam), word_(std::move(word)) {
  theta_prod_.push_back(1.0);
  for (const int sym : word_) {
    if (sym < 0 || sym >= fam_.rule_count())
      throw std::runtime_error("word symbol out of range");
    theta_prod_.push_back(theta_prod_.back() * fam_.rules[sym].theta);
  }
  levels_.emplace_back();
  for (int v = 0; v < fam_.prototile_count(); ++v) {
    SupertilePrototype p;
    p.leaf_counts.assign(fam_.prototile_count(), 0);
    p.leaf_counts[v] = 1;
    levels_.back().push_back(std::move(p));
  }
}

const SupertilePrototype& SupertileHierarchy::proto(int level, int type) const {
  if (level < 0 || level > depth_limit()) throw std::runtime_error("level out of range");
  {
    std::lock_guard<std::mutex> lock(mu_);
    while (static_cast<int>(levels_.size()) <= level) build_level(static_cast<int>(levels_.size()));
  }
  return levels_[level][type];
}

void SupertileHierarchy::build_level(int level) const {
  const SubstitutionRule& rule = fam_.rules[word_[level - 1]];
  const double inv = 1.0 / theta_prod_[level];
  std::vector<SupertilePrototype> row;
  for (int v = 0; v < fam_.prototile_count(); ++v) {
    SupertilePrototype p;
    p.leaf_counts.assign(fam_.prototile_count(), 0);
    for (const int bi : rule.branches_into[v]) {
      const Branch& b = rule.branches[bi];
      p.children.push_back(ProtoChild{b.source, bi, inv * b.offset});
      const SupertilePrototype& child = levels_[level - 1][b.source];
      for (int t = 0; t < fam_.prototile_count(); ++t) p.leaf_counts[t] += child.leaf_counts[t];
    }
    row.push_back(std::move(p));
  }
  levels_.push_back(std::move(row));
}

Aabb SupertileHierarchy::support_bounds(int level, int type, Vec t) const {
  return support_shape(level, type, t).bounds();
}

TileShape SupertileHierarchy::support_shape(int level, int type, Vec t) const {
  return fam_.prototiles[type].transformed(inv_scale(level), t);
}

std::vector<PlacedTile> Approximant::flatten() const {
  std::vector<PlacedTile> out;
  out.reserve(static_cast<size_t>(leaf_count()));
  hierarchy->visit_leaves(level, root_type, root_t,
                          [&out](const PlacedTile& tile) { out.push_back(tile); });
  return out;
}

std::int64_t Approximant::leaf_count() const {
  const SupertilePrototype& p = hierarchy->proto(level, root_type);
  std::int64_t total = 0;
  for (const std::int64_t c : p.leaf_counts) total += c;
  return total;
}

Aabb Approximant::support() const { return hierarchy->support_bounds(level, root_type, root_t); }

Approximant approximant(std::shared_ptr<SupertileHierarchy> h, const PathSpec& spec, int depth) {
  Approximant ap;
  ap.path = realize_path(h->family(), h->word(), spec, depth);
  ap.level = depth;
  ap.root_type = ap.path.vertices[depth];
  const AffineContraction f = compose_path_map(h->family(), h->word(), ap.path, depth);
  ap.root_t = -h->inv_scale(depth) * f.b;
  ap.hierarchy = std::move(h);
  return ap;
}

std::vector<Approximant> nested_expand(std::shared_ptr<SupertileHierarchy> h, const PathSpec& spec,
                                       int kmax) {
  std::vector<Approximant> out;
  out.reserve(kmax + 1);
  for (int k = 0; k <= kmax; ++k) out.push_back(approximant(h, spec, k));
  return out;
}

Vec translation_between(const TypeHFamily& fam, const std::vector<int>& word,
                        const PathRealization& e1, const PathRealization& e2, int level) {
  const size_t upper = std::min(e1.edges.size(), e2.edges.size());
  if (static_cast<size_t>(level) > upper)
    throw std::runtime_error("translation_between: level beyond both paths");
  if (e1.vertices[level] != e2.vertices[level])
    throw std::runtime_error("paths are not tail-equivalent: level ranges differ");
  for (size_t l = level; l < upper; ++l)
    if (e1.edges[l] != e2.edges[l] || e1.vertices[l + 1] != e2.vertices[l + 1])
      throw std::runtime_error("paths are not tail-equivalent above the given level");
  const AffineContraction f1 = compose_path_map(fam, word, e1, level);
  const AffineContraction f2 = compose_path_map(fam, word, e2, level);
  double theta_prod = 1.0;
  for (int l = 0; l < level; ++l) theta_prod *= fam.rules[word[l]].theta;
  return (1.0 / theta_prod) * (f2.b - f1.b);
}

PatchWindow window_from(const Approximant& ap) {
  PatchWindow w;
  w.dim = ap.hierarchy->family().dim;
  if (ap.level == 0) {
    w.tiles.push_back(PlacedTile{ap.root_type, ap.root_t, -1});
    return w;
  }
  // Walk down to the level-1 nodes so the grouping can be retained.
  struct Frame {
    int level, type;
    Vec t;
  };
  std::vector<Frame> stack{{ap.level, ap.root_type, ap.root_t}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.level == 1) {
      PatchGroup group;
      group.type = f.type;
      group.t = f.t;
      ap.hierarchy->visit_leaves(1, f.type, f.t, [&](const PlacedTile& tile) {
        group.members.push_back(static_cast<int>(w.tiles.size()));
        w.tiles.push_back(tile);
      });
      w.groups.push_back(std::move(group));
      continue;
    }
    const SupertilePrototype& p = ap.hierarchy->proto(f.level, f.type);
    for (auto it = p.children.rbegin(); it != p.children.rend(); ++it)
      stack.push_back(Frame{f.level - 1, it->type, f.t + it->t});
  }
  return w;
}

PatchWindow translate(const PatchWindow& w, Vec t) {
  PatchWindow out = w;
  for (PlacedTile& tile : out.tiles) tile.t = tile.t + t;
  for (PatchGroup& g : out.groups) g.t = g.t + t;
  return out;
}

PatchWindow renormalize_patch(const PatchWindow& w, const TypeHFamily& fam, int rule_x1) {
  if (w.groups.empty()) throw std::runtime_error("renormalize_patch needs level-1 grouping");
  const double theta = fam.rules[rule_x1].theta;
  PatchWindow out;
  out.dim = w.dim;
  out.tiles.reserve(w.groups.size());
  for (const PatchGroup& g : w.groups) out.tiles.push_back(PlacedTile{g.type, theta * g.t, -1});
  return out;
}

void sort_tiles(std::vector<PlacedTile>& tiles) {
  std::sort(tiles.begin(), tiles.end(), [](const PlacedTile& a, const PlacedTile& b) {
    const SnapKey ka = snap_key(a.t), kb = snap_key(b.t);
    if (ka != kb) return ka < kb;
    return a.proto < b.proto;
  });
}

bool tiles_equal(std::vector<PlacedTile> a, std::vector<PlacedTile> b, bool compare_collars) {
  if (a.size() != b.size()) return false;
  sort_tiles(a);
  sort_tiles(b);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].proto != b[i].proto || snap_key(a[i].t) != snap_key(b[i].t)) return false;
    if (compare_collars && a[i].collared != b[i].collared) return false;
  }
  return true;
}

GrowthReport growth_rates(const TypeHFamily& fam, const std::vector<int>& word, int depth) {
  GrowthReport report;
  const int m = fam.prototile_count();
  std::vector<double> counts(m, 1.0);
  double log_offset = 0.0;
  for (int k = 1; k <= depth; ++k) {
    const IntMatrix mat = transition_matrix(fam, word[k - 1]);
    std::vector<double> next(m, 0.0);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) next[j] += static_cast<double>(mat[j][i]) * counts[i];
    double top = 0.0;
    for (const double v : next) top = std::max(top, v);
    if (top <= 0.0) throw std::runtime_error("transition product vanished");
    for (double& v : next) v /= top;
    log_offset += std::log(top);
    counts.swap(next);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const double v : counts) {
      if (v <= 0.0) continue;  // vertex not yet reached
      const double lc = std::log(v) + log_offset;
      lo = std::min(lo, lc);
      hi = std::max(hi, lc);
    }
    report.log_counts_min.push_back(lo);
    report.log_counts_max.push_back(hi);
  }
  report.lambda_minus = report.log_counts_min.back() / depth;
  report.lambda_plus = report.log_counts_max.back() / depth;
  report.lambda_condition =
      report.lambda_plus - report.lambda_minus < report.lambda_plus / fam.dim;
  return report;
}

}  // namespace tilelab
