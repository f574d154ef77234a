#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tilelab/bratteli.hpp"
#include "tilelab/family.hpp"
#include "tilelab/geometry.hpp"

namespace tilelab {

// Translation class of a tile together with its touching neighbors. Offsets
// are relative to the center anchor; `keys` carries the snapped form used for
// identity and the canonical (lexicographic) ordering of classes.
struct CollaredClass {
  int center = 0;
  std::vector<std::pair<SnapKey, int>> keys;
  std::vector<std::pair<Vec, int>> neighbors;  // raw offsets, aligned with keys
};

bool operator==(const CollaredClass& a, const CollaredClass& b);
bool operator<(const CollaredClass& a, const CollaredClass& b);

// Neighbor queries over one fixed tile list via a uniform bucket grid. Two
// tiles are neighbors when their supports meet in any dimension >= 0.
class PatchIndex {
 public:
  PatchIndex(const TypeHFamily& fam, const std::vector<PlacedTile>& tiles);

  std::vector<int> neighbors_of(int idx) const;
  CollaredClass collar_of(int idx) const;
  // Index of the tile anchored at `t` (snapped), -1 when absent.
  int tile_at(Vec t) const;

 private:
  const TypeHFamily& fam_;
  const std::vector<PlacedTile>& tiles_;
  double cell_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

// Geometric collaring of a finite patch with convex support: the class of
// every tile whose neighborhood is certain to be complete, nullopt for the
// boundary band. Rescale supertile patches to unit scale before calling.
std::vector<std::optional<CollaredClass>> collar_patch(const TypeHFamily& fam,
                                                       const std::vector<PlacedTile>& tiles,
                                                       const TileShape& support);

struct CollarOptions {
  std::int64_t seed_leaf_cap = 200000;  // seed patch grows while leaves stay below
  int class_cap = 4096;
  int sample_words = 3;  // seed words drawn for a Bernoulli law
};

struct CollaredTileSet {
  std::vector<CollaredClass> classes;  // sorted; position = class id
  std::vector<int> support_rules;      // rules the closure ran over

  int count() const { return static_cast<int>(classes.size()); }
  int find(const CollaredClass& c) const;
  int require(const CollaredClass& c) const;  // throws when absent
};

// Collared classes seen in deep patches of the law's rule sequences, closed
// under one-step substitution by every rule in the law's support. The closure
// fixpoint is the stability witness: one more round adds nothing.
CollaredTileSet collared_tiles(const TypeHFamily& fam, const SequenceLaw& law,
                               std::uint64_t seed, const CollarOptions& opts = {});

// Collared classes of the center's children under `rule`, aligned with the
// file order of the branches into the center prototile. Throws when the set
// is not closed under the rule.
std::vector<int> collared_children(const TypeHFamily& fam, int rule, const CollaredTileSet& set,
                                   int cls);

// Entry (j, i): children of class i carrying class j under `rule`.
IntMatrix collared_matrix(const TypeHFamily& fam, int rule, const CollaredTileSet& set);

struct CollaredSystem {
  CollaredTileSet set;
  std::vector<std::vector<std::vector<int>>> children;  // [rule][class][child slot]
  std::vector<IntMatrix> matrices;                      // [rule], zero matrix off support
};

CollaredSystem build_collared_system(const TypeHFamily& fam, const SequenceLaw& law,
                                     std::uint64_t seed, const CollarOptions& opts = {});

// Summing collared counts over classes with a common center must reproduce
// the plain transition matrix. Returns a witness line, empty on success.
std::string collared_quotient_mismatch(const TypeHFamily& fam, const CollaredTileSet& set,
                                       const std::vector<IntMatrix>& matrices);

}  // namespace tilelab
