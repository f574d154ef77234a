#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "tilelab/bratteli.hpp"
#include "tilelab/cocycle.hpp"
#include "tilelab/collar.hpp"
#include "tilelab/region.hpp"

namespace tilelab {

// A weight vector over prototiles or over collared classes.
struct Observable {
  CocycleSpace space = CocycleSpace::Prototile;
  std::vector<double> weights;
};

// One blowup patch prepared for region integrals: the approximant, and in
// typed mode the collared class of its root (propagated to every node during
// descent via the per-rule child tables).
struct PatchContext {
  std::shared_ptr<SupertileHierarchy> h;
  Approximant root;
  const CollaredSystem* sys = nullptr;
  int root_class = -1;

  bool typed() const { return sys != nullptr; }
};

// Collared class of the patch root: the approximant is padded upward until
// the root supertile sits interior among the level-`depth` nodes, then the
// rescaled node patch is collared. Throws when no pad level within reach
// determines it (boundary paths never become interior).
int root_collar_class(std::shared_ptr<SupertileHierarchy> h, const PathSpec& spec, int depth,
                      const CollaredSystem& sys, int max_pad = 8);

PatchContext make_patch(std::shared_ptr<SupertileHierarchy> h, const PathSpec& spec, int depth,
                        const CollaredSystem* sys = nullptr, int max_pad = 8);

// Flatten with the collared class stored on each tile (typed mode).
std::vector<PlacedTile> flatten_typed(const PatchContext& ctx);

// Per-level counts of supertiles packed fully inside a region, the level-0
// residual band, and the top packed level.
struct Packing {
  std::vector<std::map<int, std::int64_t>> taken_by_type;   // [level][type]
  std::vector<std::map<int, std::int64_t>> taken_by_class;  // [level][class], typed only
  std::vector<PlacedTile> residual;  // level-0 tiles meeting the boundary zone
  int top_level = 0;
  std::int64_t taken_total = 0;

  std::vector<std::int64_t> level_totals() const;
};

Packing packing_decomposition(const PatchContext& ctx, const Region& region);

// Empirical constants for the two packing bound families:
//   Vol(region) <= k1 * theta_(n)^{-d}          (n = top level)
//   count_i     <= k2 * Vol(boundary) * theta_(i)^{d-1}   (i < n)
// and the residual analogue at level 0.
struct PackingBounds {
  double k1 = 0.0;
  double k2 = 0.0;
  double k_residual = 0.0;
  int top_level = 0;
};

PackingBounds packing_bounds(const Packing& p, const SupertileHierarchy& h, const Region& region);

// Region integral of the observable. `counts` accumulates level-0 tiles per
// prototile (or per collared class) exactly; value = dot(weights, counts).
// The hierarchical path never visits tiles inside fully-packed supertiles;
// the flat variant visits every tile and must produce identical counts.
struct IntegralResult {
  double value = 0.0;
  std::vector<std::int64_t> counts;
  std::int64_t anchors = 0;
  Packing packing;
};

IntegralResult ergodic_integral(const PatchContext& ctx, const Observable& beta,
                                const Region& region);
IntegralResult ergodic_integral_flat(const PatchContext& ctx, const Observable& beta,
                                     const Region& region);

// Prototile (and optionally collared-class) frequencies of deep patches.
struct FrequencyReport {
  std::vector<int> depths;
  std::vector<std::vector<double>> freqs;  // per depth, per prototile
  std::vector<double> collared_freqs;      // top depth, typed runs only
  double cross_path_discrepancy = 0.0;     // sup over prototiles at top depth
  bool minimal_precheck = true;
};

FrequencyReport patch_frequencies(const TypeHFamily& fam, const SequenceLaw& law,
                                  std::uint64_t seed, int depth,
                                  const CollaredSystem* sys = nullptr);

// Level-0 class count columns N_l = G_{x_1} ... G_{x_l} for the typed
// hierarchy; N_0 = I. Column c of N_l counts level-0 classes inside a
// level-l supertile of class c.
std::vector<IntMatrix> class_count_matrices(const CollaredSystem& sys,
                                            const std::vector<int>& word, int depth);

}  // namespace tilelab
