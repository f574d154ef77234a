#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tilelab/family.hpp"
#include "tilelab/geometry.hpp"
#include "tilelab/rng.hpp"

namespace tilelab {

// Law governing the rule sequence (x_1, x_2, ...). Fixed and periodic words
// are cyclic repetitions of `word`; Bernoulli draws i.i.d. from `probs`.
struct SequenceLaw {
  enum class Kind { Word, Bernoulli };
  Kind kind = Kind::Word;
  std::vector<int> word;        // 0-based rule indices
  std::vector<double> probs;

  static SequenceLaw fixed(std::vector<int> w) { return {Kind::Word, std::move(w), {}}; }
  static SequenceLaw bernoulli(std::vector<double> p) { return {Kind::Bernoulli, {}, std::move(p)}; }
  // Parse CLI syntax: "fixed:112", "periodic:12", "bernoulli:0.5,0.5".
  static SequenceLaw parse(const std::string& text, int rule_count);
  bool is_deterministic() const { return kind == Kind::Word; }
  std::vector<int> realize(int length, std::uint64_t seed) const;
};

enum class PathPolicy { Leftmost, SeededRandom, Cyclic };

PathPolicy path_policy_parse(const std::string& text);

// A finite path prefix plus the policy extending it upward through the
// diagram. `explicit_edges[l]` indexes the branch list out of the current
// vertex (file order): it overrides the policy for the first levels.
struct PathSpec {
  int start = 0;
  std::vector<int> explicit_edges;
  PathPolicy policy = PathPolicy::Cyclic;
  std::uint64_t seed = 0;
};

struct PathRealization {
  std::vector<int> edges;     // edges[l] = branch index within rule x_{l+1}
  std::vector<int> vertices;  // vertices[l] = type at level l; size edges+1
};

// Branch lists out of each source prototile, file order.
std::vector<std::vector<int>> branches_from(const SubstitutionRule& rule, int prototile_count);

PathRealization realize_path(const TypeHFamily& fam, const std::vector<int>& word,
                             const PathSpec& spec, int depth);

// f_{e_k} o ... o f_{e_1} for the first `upto` edges (or all when upto < 0).
AffineContraction compose_path_map(const TypeHFamily& fam, const std::vector<int>& word,
                                   const PathRealization& path, int upto = -1);

// True when the level-l composed image of the starting prototile comes
// within `margin` of the boundary of the level-l range prototile.
bool is_boundary_path(const TypeHFamily& fam, const std::vector<int>& word,
                      const PathRealization& path, int level, double margin = kEps);

struct ProtoChild {
  int type = 0;    // prototile type of the child supertile
  int branch = 0;  // branch index in the rule at this level (global, file order)
  Vec t;           // translation of the child inside the parent frame
};

// Level-n supertile prototype in blown-up coordinates: its support is
// theta_(n)^{-1} * A_type, its children are level-(n-1) prototypes.
struct SupertilePrototype {
  std::vector<ProtoChild> children;
  std::vector<std::int64_t> leaf_counts;  // per prototile type
};

// Memoized supertile prototypes for one rule word; shared by approximants,
// the packing decomposition and the ergodic integrals.
class SupertileHierarchy {
 public:
  SupertileHierarchy(const TypeHFamily& fam, std::vector<int> word);

  const TypeHFamily& family() const { return fam_; }
  const std::vector<int>& word() const { return word_; }
  int depth_limit() const { return static_cast<int>(word_.size()); }

  double theta_prod(int level) const { return theta_prod_[level]; }
  double inv_scale(int level) const { return 1.0 / theta_prod_[level]; }

  const SupertilePrototype& proto(int level, int type) const;

  Aabb support_bounds(int level, int type, Vec t) const;
  TileShape support_shape(int level, int type, Vec t) const;

  // Depth-first leaf visit; fn(PlacedTile) runs in canonical child order.
  template <typename F>
  void visit_leaves(int level, int type, Vec t, F&& fn) const {
    if (level == 0) {
      fn(PlacedTile{type, t, -1});
      return;
    }
    const SupertilePrototype& p = proto(level, type);
    for (const ProtoChild& c : p.children) visit_leaves(level - 1, c.type, t + c.t, fn);
  }

 private:
  void build_level(int level) const;

  const TypeHFamily& fam_;
  std::vector<int> word_;
  std::vector<double> theta_prod_;  // theta_prod_[l] = theta_{x_1} ... theta_{x_l}
  mutable std::mutex mu_;
  mutable std::vector<std::vector<SupertilePrototype>> levels_;
};

// Blowup approximant P_k: the level-k supertile through the path prefix,
// translated so the path's level-0 leaf keeps its anchor at the origin.
struct Approximant {
  std::shared_ptr<SupertileHierarchy> hierarchy;
  int level = 0;
  int root_type = 0;
  Vec root_t;
  PathRealization path;

  std::vector<PlacedTile> flatten() const;
  std::int64_t leaf_count() const;
  Aabb support() const;
};

Approximant approximant(std::shared_ptr<SupertileHierarchy> h, const PathSpec& spec, int depth);

// P_0 .. P_kmax along one path; P_k is a sub-patch of P_{k+1}.
std::vector<Approximant> nested_expand(std::shared_ptr<SupertileHierarchy> h, const PathSpec& spec,
                                       int kmax);

// Translation tau with T_{e1} = T_{e2} + tau for two paths that agree above
// `level`. Throws std::runtime_error when the suffixes disagree.
Vec translation_between(const TypeHFamily& fam, const std::vector<int>& word,
                        const PathRealization& e1, const PathRealization& e2, int level);

// A concrete patch with its level-1 grouping retained.
struct PatchGroup {
  int type = 0;              // level-1 supertile type
  Vec t;                     // its translation in patch coordinates
  std::vector<int> members;  // indices into tiles
};

struct PatchWindow {
  int dim = 1;
  std::vector<PlacedTile> tiles;
  std::vector<PatchGroup> groups;
};

PatchWindow window_from(const Approximant& ap);
PatchWindow translate(const PatchWindow& w, Vec t);

// One renormalization step: each level-1 group becomes a tile, coordinates
// shrink by theta_{x_1}. Grouping of the result is not retained.
PatchWindow renormalize_patch(const PatchWindow& w, const TypeHFamily& fam, int rule_x1);

// Canonical ordering/equality on snapped tiles.
void sort_tiles(std::vector<PlacedTile>& tiles);
bool tiles_equal(std::vector<PlacedTile> a, std::vector<PlacedTile> b, bool compare_collars = false);

struct GrowthReport {
  std::vector<double> log_counts_min;  // per level k: min_v log |E_v|
  std::vector<double> log_counts_max;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  bool lambda_condition = false;  // lambda_+ - lambda_- < lambda_+ / d
};

GrowthReport growth_rates(const TypeHFamily& fam, const std::vector<int>& word, int depth);

}  // namespace tilelab
