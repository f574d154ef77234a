#include "tilelab/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tilelab/kernels.hpp"

namespace tilelab {

namespace {

// A convex shape lies in a convex region exactly when its extreme points do.
// Comparisons reuse the closed forms of Region::contains so the hierarchical
// and flat integrals agree to the point.
bool shape_inside(const Region& r, const TileShape& shape) {
  switch (r.kind) {
    case Region::Kind::Interval:
      return shape.lo >= r.center.x - r.half.x && shape.hi <= r.center.x + r.half.x;
    case Region::Kind::Box: {
      const Aabb b = shape.bounds();
      return b.lo.x >= r.center.x - r.half.x && b.hi.x <= r.center.x + r.half.x &&
             b.lo.y >= r.center.y - r.half.y && b.hi.y <= r.center.y + r.half.y;
    }
    case Region::Kind::Disk: {
      if (shape.dim == 1) return r.contains({shape.lo, 0}) && r.contains({shape.hi, 0});
      for (const Vec& v : shape.poly)
        if (!r.contains(v)) return false;
      return true;
    }
  }
  return false;
}

struct PackState {
  const SupertileHierarchy* h = nullptr;
  const CollaredSystem* sys = nullptr;
  const std::vector<int>* word = nullptr;
  const Region* region = nullptr;
  Aabb raabb;
  Packing out;
};

void pack_descend(PackState& st, int level, int type, int cls, Vec t) {
  if (st.raabb.disjoint(st.h->support_bounds(level, type, t))) return;
  if (shape_inside(*st.region, st.h->support_shape(level, type, t))) {
    st.out.taken_by_type[level][type] += 1;
    if (st.sys) st.out.taken_by_class[level][cls] += 1;
    st.out.top_level = std::max(st.out.top_level, level);
    st.out.taken_total += 1;
    return;
  }
  if (level == 0) {
    st.out.residual.push_back(PlacedTile{type, t, cls});
    return;
  }
  const SupertilePrototype& p = st.h->proto(level, type);
  const std::vector<int>* ch =
      st.sys ? &st.sys->children[(*st.word)[level - 1]][cls] : nullptr;
  for (std::size_t s = 0; s < p.children.size(); ++s) {
    const ProtoChild& c = p.children[s];
    pack_descend(st, level - 1, c.type, ch ? (*ch)[s] : -1, t + c.t);
  }
}

// Count residual anchors inside the region, bucketed by `ids` (prototile or
// collared class), through the dispatched counting kernels.
void count_residual(const std::vector<PlacedTile>& residual, const Region& region, bool by_class,
                    std::vector<std::int64_t>& counts) {
  if (residual.empty()) return;
  std::vector<double> xs(residual.size()), ys(residual.size());
  std::vector<std::int32_t> ids(residual.size());
  for (std::size_t i = 0; i < residual.size(); ++i) {
    xs[i] = residual[i].t.x;
    ys[i] = residual[i].t.y;
    const int id = by_class ? residual[i].collared : residual[i].proto;
    if (id < 0 || id >= static_cast<int>(counts.size()))
      throw std::runtime_error("residual tile carries no usable class id");
    ids[i] = static_cast<std::int32_t>(id);
  }
  count_per_class(xs.data(), ys.data(), ids.data(), xs.size(), region, counts.data());
}

double dot_counts(const std::vector<double>& w, const std::vector<std::int64_t>& counts) {
  double value = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) value += w[j] * static_cast<double>(counts[j]);
  return value;
}

void check_observable(const PatchContext& ctx, const Observable& beta) {
  if (beta.space == CocycleSpace::Collared) {
    if (!ctx.typed())
      throw std::runtime_error("collared observable needs a patch typed by a collared system");
    if (static_cast<int>(beta.weights.size()) != ctx.sys->set.count())
      throw std::runtime_error("observable length does not match the collared class count");
  } else if (static_cast<int>(beta.weights.size()) != ctx.h->family().prototile_count()) {
    throw std::runtime_error("observable length does not match the prototile count");
  }
}

}  // namespace

std::vector<std::int64_t> Packing::level_totals() const {
  std::vector<std::int64_t> out(taken_by_type.size(), 0);
  for (std::size_t l = 0; l < taken_by_type.size(); ++l)
    for (const auto& [type, n] : taken_by_type[l]) out[l] += n;
  return out;
}

int root_collar_class(std::shared_ptr<SupertileHierarchy> h, const PathSpec& spec, int depth,
                      const CollaredSystem& sys, int max_pad) {
  const TypeHFamily& fam = h->family();
  const Approximant base = approximant(h, spec, depth);
  const double scale = h->theta_prod(depth);
  for (int pad = 1; pad <= max_pad; ++pad) {
    if (depth + pad > h->depth_limit()) break;
    const Approximant big = approximant(h, spec, depth + pad);

    // Level-`depth` nodes of the padded patch, rescaled to unit prototiles.
    std::vector<PlacedTile> nodes;
    const auto gather = [&](auto&& self, int level, int type, Vec t) -> void {
      if (level == depth) {
        nodes.push_back(PlacedTile{type, scale * t, -1});
        return;
      }
      const SupertilePrototype& p = h->proto(level, type);
      for (const ProtoChild& c : p.children) self(self, level - 1, c.type, t + c.t);
    };
    gather(gather, big.level, big.root_type, big.root_t);

    const TileShape support =
        h->support_shape(big.level, big.root_type, big.root_t).transformed(scale, Vec{});
    const std::vector<std::optional<CollaredClass>> collars = collar_patch(fam, nodes, support);

    PatchIndex index(fam, nodes);
    const int root_idx = index.tile_at(scale * base.root_t);
    if (root_idx < 0) throw std::runtime_error("padded patch lost the root node");
    if (collars[root_idx].has_value()) return sys.set.require(*collars[root_idx]);
  }
  throw std::runtime_error(
      "root collar undetermined: the padded patch never encloses the root "
      "(boundary paths stay on the support edge at every level)");
}

PatchContext make_patch(std::shared_ptr<SupertileHierarchy> h, const PathSpec& spec, int depth,
                        const CollaredSystem* sys, int max_pad) {
  PatchContext ctx;
  ctx.root = approximant(h, spec, depth);
  ctx.sys = sys;
  if (sys) ctx.root_class = root_collar_class(h, spec, depth, *sys, max_pad);
  ctx.h = std::move(h);
  return ctx;
}

std::vector<PlacedTile> flatten_typed(const PatchContext& ctx) {
  if (!ctx.typed()) return ctx.root.flatten();
  std::vector<PlacedTile> out;
  out.reserve(static_cast<std::size_t>(ctx.root.leaf_count()));
  const std::vector<int>& word = ctx.h->word();
  const auto walk = [&](auto&& self, int level, int type, int cls, Vec t) -> void {
    if (level == 0) {
      out.push_back(PlacedTile{type, t, cls});
      return;
    }
    const SupertilePrototype& p = ctx.h->proto(level, type);
    const std::vector<int>& ch = ctx.sys->children[word[level - 1]][cls];
    for (std::size_t s = 0; s < p.children.size(); ++s)
      self(self, level - 1, p.children[s].type, ch[s], t + p.children[s].t);
  };
  walk(walk, ctx.root.level, ctx.root.root_type, ctx.root_class, ctx.root.root_t);
  return out;
}

Packing packing_decomposition(const PatchContext& ctx, const Region& region) {
  PackState st;
  st.h = ctx.h.get();
  st.sys = ctx.sys;
  st.word = &ctx.h->word();
  st.region = &region;
  st.raabb = region.aabb();
  st.out.taken_by_type.resize(ctx.root.level + 1);
  st.out.taken_by_class.resize(ctx.sys ? ctx.root.level + 1 : 0);
  pack_descend(st, ctx.root.level, ctx.root.root_type, ctx.root_class, ctx.root.root_t);
  return std::move(st.out);
}

PackingBounds packing_bounds(const Packing& p, const SupertileHierarchy& h, const Region& region) {
  const int dim = h.family().dim;
  PackingBounds out;
  out.top_level = p.top_level;
  out.k1 = region.volume(dim) * std::pow(h.theta_prod(p.top_level), dim);
  const double bm = region.boundary_measure(dim);
  const std::vector<std::int64_t> totals = p.level_totals();
  for (int i = 0; i < p.top_level; ++i) {
    const double scaled =
        static_cast<double>(totals[i]) / (bm * std::pow(h.theta_prod(i), dim - 1));
    out.k2 = std::max(out.k2, scaled);
  }
  out.k_residual = static_cast<double>(p.residual.size()) / bm;
  return out;
}

std::vector<IntMatrix> class_count_matrices(const CollaredSystem& sys,
                                            const std::vector<int>& word, int depth) {
  const int m = sys.set.count();
  std::vector<IntMatrix> out;
  out.reserve(depth + 1);
  IntMatrix id(m, std::vector<std::int64_t>(m, 0));
  for (int j = 0; j < m; ++j) id[j][j] = 1;
  out.push_back(std::move(id));
  for (int l = 1; l <= depth; ++l) {
    const IntMatrix& prev = out.back();
    const IntMatrix& g = sys.matrices[word[l - 1]];
    IntMatrix next(m, std::vector<std::int64_t>(m, 0));
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const std::int64_t v = prev[j][k];
        if (v == 0) continue;
        for (int i = 0; i < m; ++i) next[j][i] += v * g[k][i];
      }
    out.push_back(std::move(next));
  }
  return out;
}

IntegralResult ergodic_integral(const PatchContext& ctx, const Observable& beta,
                                const Region& region) {
  check_observable(ctx, beta);
  IntegralResult res;
  res.packing = packing_decomposition(ctx, region);
  const bool by_class = beta.space == CocycleSpace::Collared;
  res.counts.assign(beta.weights.size(), 0);

  if (by_class) {
    const std::vector<IntMatrix> n_l =
        class_count_matrices(*ctx.sys, ctx.h->word(), res.packing.top_level);
    for (std::size_t l = 0; l < res.packing.taken_by_class.size(); ++l)
      for (const auto& [cls, cnt] : res.packing.taken_by_class[l])
        for (std::size_t j = 0; j < res.counts.size(); ++j)
          res.counts[j] += cnt * n_l[l][j][cls];
  } else {
    for (std::size_t l = 0; l < res.packing.taken_by_type.size(); ++l)
      for (const auto& [type, cnt] : res.packing.taken_by_type[l]) {
        const SupertilePrototype& p = ctx.h->proto(static_cast<int>(l), type);
        for (std::size_t j = 0; j < res.counts.size(); ++j)
          res.counts[j] += cnt * p.leaf_counts[j];
      }
  }
  count_residual(res.packing.residual, region, by_class, res.counts);
  for (const std::int64_t c : res.counts) res.anchors += c;
  res.value = dot_counts(beta.weights, res.counts);
  return res;
}

IntegralResult ergodic_integral_flat(const PatchContext& ctx, const Observable& beta,
                                     const Region& region) {
  check_observable(ctx, beta);
  IntegralResult res;
  res.counts.assign(beta.weights.size(), 0);
  const bool by_class = beta.space == CocycleSpace::Collared;
  const std::vector<PlacedTile> tiles = by_class ? flatten_typed(ctx) : ctx.root.flatten();
  count_residual(tiles, region, by_class, res.counts);
  for (const std::int64_t c : res.counts) res.anchors += c;
  res.value = dot_counts(beta.weights, res.counts);
  return res;
}

FrequencyReport patch_frequencies(const TypeHFamily& fam, const SequenceLaw& law,
                                  std::uint64_t seed, int depth,
                                  const CollaredSystem* sys) {
  if (depth < 1) throw std::runtime_error("frequency depth must be at least 1");
  const int m = fam.prototile_count();
  const std::vector<int> word = law.realize(depth + 12, seed);

  // Positivity precheck on the realized word: the boolean product of the
  // first transition matrices must fill up, otherwise deep-patch frequencies
  // are path-dependent and the report would be meaningless.
  {
    const int steps = std::min<int>(32, static_cast<int>(word.size()));
    std::vector<std::vector<char>> reach(m, std::vector<char>(m, 0));
    for (int i = 0; i < m; ++i) reach[i][i] = 1;
    for (int s = 0; s < steps; ++s) {
      const IntMatrix mat = transition_matrix(fam, word[s]);
      std::vector<std::vector<char>> next(m, std::vector<char>(m, 0));
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          if (mat[j][k] == 0) continue;
          for (int i = 0; i < m; ++i)
            if (reach[k][i]) next[j][i] = 1;
        }
      reach.swap(next);
    }
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        if (!reach[j][i])
          throw std::runtime_error("family and law fail the minimality precheck: prototile '" +
                                   fam.prototile_ids[i] + "' never reaches '" +
                                   fam.prototile_ids[j] + "' along the realized word");
  }

  auto h = std::make_shared<SupertileHierarchy>(fam, word);
  const PathSpec spec1{0, {}, PathPolicy::SeededRandom, seed};
  const PathSpec spec2{std::min(1, m - 1), {}, PathPolicy::SeededRandom, seed + 101};
  const PathRealization p1 = realize_path(fam, word, spec1, depth);
  const PathRealization p2 = realize_path(fam, word, spec2, depth);

  FrequencyReport rep;
  const auto freq_at = [&](const PathRealization& p, int k) {
    const SupertilePrototype& proto = h->proto(k, p.vertices[k]);
    double total = 0;
    for (const std::int64_t c : proto.leaf_counts) total += static_cast<double>(c);
    std::vector<double> f(m, 0.0);
    for (int i = 0; i < m; ++i) f[i] = static_cast<double>(proto.leaf_counts[i]) / total;
    return f;
  };
  for (int k = 1; k <= depth; ++k) {
    rep.depths.push_back(k);
    rep.freqs.push_back(freq_at(p1, k));
  }
  const std::vector<double> other = freq_at(p2, depth);
  for (int i = 0; i < m; ++i)
    rep.cross_path_discrepancy =
        std::max(rep.cross_path_discrepancy, std::abs(rep.freqs.back()[i] - other[i]));

  if (sys) {
    const int root = root_collar_class(h, spec1, depth, *sys,
                                       std::min(10, h->depth_limit() - depth));
    const std::vector<IntMatrix> n_l = class_count_matrices(*sys, word, depth);
    const int c = sys->set.count();
    double total = 0;
    for (int j = 0; j < c; ++j) total += static_cast<double>(n_l[depth][j][root]);
    rep.collared_freqs.resize(c);
    for (int j = 0; j < c; ++j)
      rep.collared_freqs[j] = static_cast<double>(n_l[depth][j][root]) / total;
  }
  return rep;
}

}  // namespace tilelab
