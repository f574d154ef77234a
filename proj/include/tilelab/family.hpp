#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tilelab/geometry.hpp"

namespace tilelab {

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One branch map of a rule: a scaled copy of prototile `source` placed
// inside prototile `target` at `offset`.
struct Branch {
  int source = 0;
  int target = 0;
  Vec offset;
  // Optional per-branch scale from the document; must equal the rule theta
  // (documents that violate this are rejected by the uniform-scaling check).
  double theta_override = -1.0;
  bool has_override = false;
};

struct SubstitutionRule {
  std::string id;
  double theta = 0.5;
  std::vector<Branch> branches;
  // Indices into `branches`, grouped by target prototile, file order
  // preserved within each group. This is the canonical child order of a
  // supertile.
  std::vector<std::vector<int>> branches_into;
};

using IntMatrix = std::vector<std::vector<std::int64_t>>;

struct TypeHFamily {
  std::string name;
  int dim = 1;
  std::vector<std::string> prototile_ids;
  std::vector<TileShape> prototiles;
  std::vector<SubstitutionRule> rules;
  std::map<std::string, double> constants;

  int prototile_count() const { return static_cast<int>(prototiles.size()); }
  int rule_count() const { return static_cast<int>(rules.size()); }
  int prototile_index(const std::string& id) const;
  // Recompute branches_into after editing rules.
  void reindex();
};

// Entry (j, i) = number of branches copying prototile i into prototile j.
IntMatrix transition_matrix(const TypeHFamily& fam, int rule);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string witness;  // empty on pass
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool ok() const;
  const CheckResult* find(const std::string& name) const;
};

// The four structural checks: contracting, uniform-scaling,
// shared-attractor-interior-origin, compatibility (pairwise cell
// intersections on one- and two-level blowups over all rule words).
ValidationReport validate_type_h(const TypeHFamily& fam, double vol_tol = 1e-6);

TypeHFamily parse_family(const std::string& toml_text);
TypeHFamily load_family(const std::string& path);
std::string serialize_family(const TypeHFamily& fam);

// Structural identity: same name, dimension, shapes, rules and branch lists
// with bit-identical numbers. Constants are resolved at load time and do not
// participate.
bool family_equal(const TypeHFamily& a, const TypeHFamily& b);

// Tensor product of two 1-d families with equal rule counts and pairwise
// equal thetas; prototile (i, j) gets index i * g.prototile_count() + j.
TypeHFamily product_family_2d(const TypeHFamily& f, const TypeHFamily& g);

}  // namespace tilelab
