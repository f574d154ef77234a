#include "tilelab/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tilelab/rng.hpp"

namespace tilelab {

namespace {

constexpr double kZeroIntegral = 1e-12;

double max_abs_extent(const Aabb& b) {
  return std::max(std::max(std::abs(b.lo.x), std::abs(b.hi.x)),
                  std::max(std::abs(b.lo.y), std::abs(b.hi.y)));
}

double prototile_diameter(const TypeHFamily& fam) {
  double d = 0.0;
  for (const TileShape& s : fam.prototiles) {
    const Aabb b = s.bounds();
    d = std::max(d, norm(b.hi - b.lo));
  }
  return d;
}

// Level-`level` nodes of the patch whose supports meet `box`, carrying the
// collared class when the patch is typed.
std::vector<PlacedTile> level_nodes_in(const PatchContext& ctx, int level, const Aabb& box) {
  std::vector<PlacedTile> out;
  const std::vector<int>& word = ctx.h->word();
  const auto walk = [&](auto&& self, int lv, int type, int cls, Vec t) -> void {
    if (box.disjoint(ctx.h->support_bounds(lv, type, t))) return;
    if (lv == level) {
      out.push_back(PlacedTile{type, t, cls});
      return;
    }
    const SupertilePrototype& p = ctx.h->proto(lv, type);
    const std::vector<int>* ch = ctx.typed() ? &ctx.sys->children[word[lv - 1]][cls] : nullptr;
    for (std::size_t s = 0; s < p.children.size(); ++s)
      self(self, lv - 1, p.children[s].type, ch ? (*ch)[s] : -1, t + p.children[s].t);
  };
  walk(walk, ctx.root.level, ctx.root.root_type, ctx.root_class, ctx.root.root_t);
  return out;
}

DeviationPoint measure_point(const PatchContext& ctx, const Observable& beta,
                             const Region& region, double t_value) {
  const IntegralResult res = ergodic_integral(ctx, beta, region);
  DeviationPoint pt;
  pt.T = t_value;
  pt.value = res.value;
  pt.anchors = res.anchors;
  pt.top_level = res.packing.top_level;
  pt.level_totals = res.packing.level_totals();
  pt.level_totals.resize(res.packing.top_level + 1);
  return pt;
}

// Recurrence levels for the subsequence: multiples of the period for a
// deterministic law, prefix-recurrence times of the realized word otherwise.
std::vector<int> recurrence_levels(const SequenceLaw& law, const std::vector<int>& word,
                                   int count, int max_level) {
  std::vector<int> out;
  if (law.is_deterministic()) {
    const int p = static_cast<int>(law.word.size());
    for (int k = 1; static_cast<int>(out.size()) < count && k * p <= max_level; ++k)
      out.push_back(k * p);
    return out;
  }
  int prev = 0;
  for (int k = 1; static_cast<int>(out.size()) < count; ++k) {
    int found = -1;
    for (int n = prev + 1; n + k <= static_cast<int>(word.size()) && n <= max_level; ++n) {
      bool agrees = true;
      for (int i = 0; i < k; ++i)
        if (word[n + i] != word[i]) {
          agrees = false;
          break;
        }
      if (agrees) {
        found = n;
        break;
      }
    }
    if (found < 0) break;
    out.push_back(found);
    prev = found;
  }
  return out;
}

}  // namespace

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-30) return 0.0;
  return (n * sxy - sx * sy) / den;
}

DeviationReport deviation_series(const TypeHFamily& fam, const SequenceLaw& law,
                                 std::uint64_t seed, const PathSpec& path, const Observable& beta,
                                 const DeviationParams& params, const CollaredSystem* sys) {
  if (params.t_min <= 0 || params.t_max < params.t_min)
    throw std::runtime_error("deviation needs 0 < t_min <= t_max");
  if (beta.space == CocycleSpace::Collared && !sys)
    throw std::runtime_error("collared observable needs a collared system");

  const int word_budget = 160;
  const std::vector<int> word = law.realize(word_budget, seed);
  auto h = std::make_shared<SupertileHierarchy>(fam, word);

  double theta_max = 0.0;
  for (const int r : word) theta_max = std::max(theta_max, fam.rules[r].theta);

  std::vector<double> grid;
  for (double t = params.t_min; t <= params.t_max * (1 + 1e-9);
       t *= std::pow(theta_max, -0.5))
    grid.push_back(t);

  // Recurrence levels first: the patch must cover their translated regions.
  const double diam0 = prototile_diameter(fam);
  std::vector<int> sub_levels;
  if (params.subsequence) {
    sub_levels = recurrence_levels(law, word, params.sub_count, word_budget - 16);
    while (!sub_levels.empty() &&
           params.t_min * h->inv_scale(sub_levels.back()) > params.t_max)
      sub_levels.pop_back();
  }

  const Aabb base_box = params.base.aabb();
  double need_x = params.t_max * std::max(std::abs(base_box.lo.x), std::abs(base_box.hi.x));
  double need_y = params.t_max * std::max(std::abs(base_box.lo.y), std::abs(base_box.hi.y));
  for (const int n : sub_levels) {
    const double t_n = params.t_min * h->inv_scale(n);
    const double reach = 3.0 * diam0 * h->inv_scale(n);
    need_x = std::max(need_x, t_n * std::max(std::abs(base_box.lo.x), std::abs(base_box.hi.x)) +
                                  reach);
    if (fam.dim == 2)
      need_y = std::max(need_y, t_n * std::max(std::abs(base_box.lo.y), std::abs(base_box.hi.y)) +
                                    reach);
  }
  const double pad = 1e-9 * (1 + need_x + need_y);
  const Aabb needed{{-need_x - pad, fam.dim == 2 ? -need_y - pad : 0.0},
                    {need_x + pad, fam.dim == 2 ? need_y + pad : 0.0}};

  // A patch a million times wider than the needed box that still misses it
  // hugs the support boundary; larger scales only lose precision to
  // cancellation in the anchor coordinates.
  int depth = -1;
  const double scale_cap = 1e6 * (1.0 + need_x + need_y);
  for (int k = 1; k + 16 <= word_budget && h->inv_scale(k) <= scale_cap; ++k) {
    const Approximant probe = approximant(h, path, k);
    if (probe.support().contains(needed)) {
      depth = k;
      break;
    }
  }
  if (depth < 0)
    throw std::runtime_error(
        "the patch along this path cannot cover the requested region; boundary "
        "paths only ever cover a half space, try another start or policy");

  const PatchContext ctx =
      make_patch(h, path, depth, sys, std::min(12, h->depth_limit() - depth));

  DeviationReport rep;
  rep.depth = depth;
  rep.seed = seed;
  for (const double t : grid)
    rep.points.push_back(measure_point(ctx, beta, params.base.scaled(t), t));

  // Envelope: the largest |I| per log-T window, then one straight-line fit.
  {
    const double x_lo = std::log(grid.front());
    const double x_hi = std::log(grid.back()) + 1e-12;
    const double width = (x_hi - x_lo) / params.windows;
    std::vector<int> best(params.windows, -1);
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
      if (std::abs(rep.points[i].value) < kZeroIntegral) continue;
      int w = static_cast<int>((std::log(rep.points[i].T) - x_lo) / width);
      w = std::clamp(w, 0, params.windows - 1);
      if (best[w] < 0 ||
          std::abs(rep.points[i].value) > std::abs(rep.points[best[w]].value))
        best[w] = static_cast<int>(i);
    }
    std::vector<double> xs, ys;
    for (const int i : best) {
      if (i < 0) continue;
      xs.push_back(std::log(rep.points[i].T));
      ys.push_back(std::log(std::abs(rep.points[i].value)));
    }
    rep.envelope_points = static_cast<int>(xs.size());
    if (rep.envelope_points < params.min_points)
      throw std::runtime_error("envelope slope underdetermined: only " +
                               std::to_string(rep.envelope_points) + " of " +
                               std::to_string(params.windows) +
                               " windows hold a usable maximum; the observable may vanish "
                               "on this patch");
    rep.slope = fit_slope(xs, ys);
  }

  // Cocycle-side prediction.
  {
    const std::vector<Eigen::MatrixXd> mats = cocycle_matrices(fam, beta.space, sys);
    const Filtration f = oseledets_filtration(mats, word, params.filtration_n);
    Eigen::VectorXd bv(static_cast<int>(beta.weights.size()));
    for (std::size_t j = 0; j < beta.weights.size(); ++j)
      bv[static_cast<int>(j)] = beta.weights[j];
    rep.alpha = f.coefficients(bv);

    const int samples = law.is_deterministic() ? 1 : params.lyapunov_samples;
    const LyapunovReport lr =
        lyapunov_spectrum(fam, law, params.lyapunov_n, samples, seed + 1, beta.space, sys);
    rep.lambda1 = lr.exponents.empty() ? 0.0 : lr.exponents[0];

    const double inf = std::numeric_limits<double>::infinity();
    rep.exponents.assign(rep.alpha.size(), -inf);
    for (std::size_t j = 0; j < rep.exponents.size(); ++j)
      if (static_cast<int>(j) < lr.rank) rep.exponents[j] = lr.exponents[j];

    const double beta_norm = bv.norm();
    const double tol = 1e-9 * std::max(1.0, beta_norm);
    int lead = -1;
    for (std::size_t j = 0; j < rep.alpha.size() && lead < 0;) {
      const int b = f.block[j];
      double block_norm = 0.0;
      std::size_t k = j;
      for (; k < rep.alpha.size() && f.block[k] == b; ++k)
        block_norm += rep.alpha[k] * rep.alpha[k];
      if (std::sqrt(block_norm) > tol) lead = static_cast<int>(j);
      j = k;
    }
    if (lead < 0)
      throw std::runtime_error("observable pairs to zero against every filtration block");
    rep.leading_index = lead;

    const double threshold = (fam.dim - 1) * rep.lambda1 / fam.dim - 1e-9;
    if (rep.exponents[lead] >= threshold) {
      rep.predicted = fam.dim * rep.exponents[lead] / rep.lambda1;
    } else {
      rep.boundary_case = true;
      rep.predicted = fam.dim - 1;
    }
  }

  // Recurrence subsequence: integrals over T_k B + tau_k where tau_k is the
  // anchor of the nearest level-n_k node carrying the origin node's class.
  for (const int n : sub_levels) {
    const double t_n = params.t_min * h->inv_scale(n);
    const double reach = 3.0 * diam0 * h->inv_scale(n);
    const Aabb search{{-reach, fam.dim == 2 ? -reach : 0.0},
                      {reach, fam.dim == 2 ? reach : 0.0}};
    const std::vector<PlacedTile> nodes = level_nodes_in(ctx, n, search);

    const Approximant origin = approximant(h, path, n);
    int origin_idx = -1;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].proto == origin.root_type && snap_equal(nodes[i].t, origin.root_t)) {
        origin_idx = static_cast<int>(i);
        break;
      }
    if (origin_idx < 0) throw std::runtime_error("origin supertile missing from its own patch");

    int pick = -1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (norm(nodes[i].t) > reach) continue;
      if (ctx.typed() ? nodes[i].collared != nodes[origin_idx].collared
                      : nodes[i].proto != nodes[origin_idx].proto)
        continue;
      if (pick < 0 || norm(nodes[i].t) < norm(nodes[pick].t)) pick = static_cast<int>(i);
    }
    if (pick < 0) pick = origin_idx;

    const Region region = params.base.scaled(t_n).translated(nodes[pick].t);
    rep.sub_points.push_back(measure_point(ctx, beta, region, t_n));
    rep.sub_levels.push_back(n);
    rep.sub_anchors.push_back(nodes[pick].t);
  }
  if (rep.sub_points.size() >= 2) {
    std::vector<double> xs, ys;
    for (const DeviationPoint& pt : rep.sub_points) {
      if (std::abs(pt.value) < kZeroIntegral) continue;
      xs.push_back(std::log(pt.T));
      ys.push_back(std::log(std::abs(pt.value)));
    }
    if (xs.size() >= 2) rep.sub_slope = fit_slope(xs, ys);
  }
  return rep;
}

BoundaryReport boundary_measure_decay(const TypeHFamily& fam, const SequenceLaw& law,
                                      std::uint64_t seed, int kmax, int samples) {
  if (kmax < 2) throw std::runtime_error("boundary decay needs kmax >= 2");
  if (samples < 1) throw std::runtime_error("boundary decay needs samples >= 1");
  const int m = fam.prototile_count();

  BoundaryReport rep;
  rep.kmax = kmax;
  rep.samples = samples;
  rep.seed = seed;
  rep.hits.assign(kmax, 0);

  for (int s = 0; s < samples; ++s) {
    const std::vector<int> word = law.realize(kmax, seed + 0x9e3779b9ULL * s);
    Rng rng(seed ^ (0x517cc1b727220a95ULL + 2 * s));

    // Path counts per level; doubles so deep diagrams cannot overflow.
    std::vector<std::vector<double>> c(kmax + 1, std::vector<double>(m, 0.0));
    c[0].assign(m, 1.0);
    std::vector<IntMatrix> mats;
    for (int l = 1; l <= kmax; ++l) {
      mats.push_back(transition_matrix(fam, word[l - 1]));
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) c[l][j] += static_cast<double>(mats.back()[j][i]) * c[l - 1][i];
    }

    const auto draw = [&rng](const std::vector<double>& w) {
      double total = 0.0;
      for (const double v : w) total += v;
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < w.size(); ++i) {
        u -= w[i];
        if (u <= 0) return static_cast<int>(i);
      }
      return static_cast<int>(w.size()) - 1;
    };

    // Uniform path measure: top vertex by path count, then edges downward
    // weighted by the counts below their sources.
    PathRealization path;
    path.vertices.assign(kmax + 1, 0);
    path.edges.assign(kmax, 0);
    path.vertices[kmax] = draw(c[kmax]);
    for (int l = kmax; l >= 1; --l) {
      const SubstitutionRule& rule = fam.rules[word[l - 1]];
      const std::vector<int>& into = rule.branches_into[path.vertices[l]];
      std::vector<double> w(into.size(), 0.0);
      for (std::size_t e = 0; e < into.size(); ++e)
        w[e] = c[l - 1][rule.branches[into[e]].source];
      const int e = draw(w);
      path.edges[l - 1] = into[e];
      path.vertices[l - 1] = rule.branches[into[e]].source;
    }

    for (int l = 1; l <= kmax; ++l)
      if (is_boundary_path(fam, word, path, l)) rep.hits[l - 1] += 1;
  }

  rep.mass.resize(kmax);
  std::vector<double> xs, ys;
  for (int l = 1; l <= kmax; ++l) {
    rep.mass[l - 1] = static_cast<double>(rep.hits[l - 1]) / samples;
    rep.partial_sum += rep.mass[l - 1];
    if (rep.hits[l - 1] > 0) {
      xs.push_back(l);
      ys.push_back(std::log(rep.mass[l - 1]));
    }
  }
  rep.fit_points = static_cast<int>(xs.size());
  rep.rate = rep.fit_points >= 2 ? std::exp(fit_slope(xs, ys)) : 0.0;
  return rep;
}

}  // namespace tilelab
