#include "tilelab/family.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tilelab/expr.hpp"
#include "tilelab/toml.hpp"

namespace tilelab {

int TypeHFamily::prototile_index(const std::string& id) const {
  for (size_t i = 0; i < prototile_ids.size(); ++i)
    if (prototile_ids[i] == id) return static_cast<int>(i);
  return -1;
}

void TypeHFamily::reindex() {
  for (SubstitutionRule& rule : rules) {
    rule.branches_into.assign(prototiles.size(), {});
    for (size_t bi = 0; bi < rule.branches.size(); ++bi)
      rule.branches_into[rule.branches[bi].target].push_back(static_cast<int>(bi));
  }
}

IntMatrix transition_matrix(const TypeHFamily& fam, int rule) {
  const int m = fam.prototile_count();
  IntMatrix mat(m, std::vector<std::int64_t>(m, 0));
  for (const Branch& b : fam.rules[rule].branches) mat[b.target][b.source] += 1;
  return mat;
}

bool ValidationReport::ok() const {
  for (const CheckResult& c : checks)
    if (!c.passed) return false;
  return true;
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const CheckResult& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double value_as_number(const TomlValue& v, const std::map<std::string, double>& constants,
                       const std::string& context) {
  if (v.kind == TomlValue::Kind::Number) return v.num;
  if (v.kind == TomlValue::Kind::String) {
    try {
      return eval_expression(v.str, constants);
    } catch (const std::exception& e) {
      throw LoadError(context + ": " + e.what());
    }
  }
  throw LoadError(context + ": expected a number or expression string");
}

const TomlValue& require_value(const TomlTable& t, const std::string& key,
                               const std::string& context) {
  const auto it = t.values.find(key);
  if (it == t.values.end()) throw LoadError(context + ": missing key '" + key + "'");
  return it->second;
}

std::string require_string(const TomlTable& t, const std::string& key,
                           const std::string& context) {
  const TomlValue& v = require_value(t, key, context);
  if (v.kind != TomlValue::Kind::String) throw LoadError(context + ": '" + key + "' must be a string");
  return v.str;
}

std::map<std::string, double> resolve_constants(const TomlTable& root) {
  std::map<std::string, double> constants;
  const auto it = root.tables.find("constants");
  if (it == root.tables.end()) return constants;
  // Definitions may reference each other in any order; iterate to a fixpoint.
  std::map<std::string, TomlValue> pending = it->second.values;
  while (!pending.empty()) {
    bool progress = false;
    for (auto pit = pending.begin(); pit != pending.end();) {
      try {
        constants[pit->first] = value_as_number(pit->second, constants, "constants." + pit->first);
        pit = pending.erase(pit);
        progress = true;
      } catch (const LoadError&) {
        ++pit;
      }
    }
    if (!progress) {
      std::string names;
      for (const auto& [k, v] : pending) names += names.empty() ? k : ", " + k;
      throw LoadError("constants cannot be resolved (circular or unknown reference): " + names);
    }
  }
  return constants;
}

Vec read_offset(const TomlValue& v, int dim, const std::map<std::string, double>& constants,
                const std::string& context) {
  if (v.kind != TomlValue::Kind::Array || static_cast<int>(v.arr.size()) != dim)
    throw LoadError(context + ": offset must be an array of length " + std::to_string(dim));
  Vec out;
  out.x = value_as_number(v.arr[0], constants, context);
  if (dim == 2) out.y = value_as_number(v.arr[1], constants, context);
  return out;
}

}  // namespace

TypeHFamily parse_family(const std::string& toml_text) {
  TomlTable root;
  try {
    root = toml_parse(toml_text);
  } catch (const std::runtime_error& e) {
    throw LoadError(e.what());
  }
  TypeHFamily fam;
  fam.name = require_string(root, "name", "document");
  fam.constants = resolve_constants(root);

  const auto pit = root.table_arrays.find("prototile");
  if (pit == root.table_arrays.end() || pit->second.empty())
    throw LoadError("document: at least one [[prototile]] required");
  int dim = 0;
  for (const TomlTable& pt : pit->second) {
    const std::string id = require_string(pt, "id", "prototile");
    const std::string ctx = "prototile '" + id + "'";
    if (fam.prototile_index(id) >= 0) throw LoadError(ctx + ": duplicate id");
    const double dnum = value_as_number(require_value(pt, "dim", ctx), fam.constants, ctx);
    const int pdim = static_cast<int>(dnum);
    if (pdim != 1 && pdim != 2) throw LoadError(ctx + ": dim must be 1 or 2");
    if (dim == 0) dim = pdim;
    if (dim != pdim) throw LoadError(ctx + ": mixed prototile dimensions");

    TileShape shape;
    shape.dim = pdim;
    if (pdim == 1) {
      const TomlValue& iv = require_value(pt, "interval", ctx);
      if (iv.kind != TomlValue::Kind::Array || iv.arr.size() != 2)
        throw LoadError(ctx + ": interval must be [lo, hi]");
      shape.lo = value_as_number(iv.arr[0], fam.constants, ctx);
      shape.hi = value_as_number(iv.arr[1], fam.constants, ctx);
      if (!(shape.lo < shape.hi)) throw LoadError(ctx + ": interval must have positive length");
    } else {
      const TomlValue& pv = require_value(pt, "polygon", ctx);
      if (pv.kind != TomlValue::Kind::Array || pv.arr.size() < 3)
        throw LoadError(ctx + ": polygon needs at least 3 vertices");
      for (const TomlValue& vert : pv.arr)
        shape.poly.push_back(read_offset(vert, 2, fam.constants, ctx));
      if (polygon_area(shape.poly) < 0) std::reverse(shape.poly.begin(), shape.poly.end());
      if (!polygon_is_convex_ccw(shape.poly))
        throw LoadError(ctx + ": polygon must be convex and non-degenerate");
    }
    fam.prototile_ids.push_back(id);
    fam.prototiles.push_back(std::move(shape));
  }
  fam.dim = dim;

  const auto rit = root.table_arrays.find("rule");
  if (rit == root.table_arrays.end() || rit->second.empty())
    throw LoadError("document: at least one [[rule]] required");
  std::set<std::string> rule_ids;
  for (const TomlTable& rt : rit->second) {
    SubstitutionRule rule;
    rule.id = require_string(rt, "id", "rule");
    const std::string ctx = "rule '" + rule.id + "'";
    if (!rule_ids.insert(rule.id).second) throw LoadError(ctx + ": duplicate id");
    rule.theta = value_as_number(require_value(rt, "theta", ctx), fam.constants, ctx);

    const auto bit = rt.table_arrays.find("branch");
    if (bit == rt.table_arrays.end() || bit->second.empty())
      throw LoadError(ctx + ": at least one [[rule.branch]] required");
    for (const TomlTable& bt : bit->second) {
      Branch br;
      const std::string src = require_string(bt, "source", ctx);
      const std::string tgt = require_string(bt, "target", ctx);
      br.source = fam.prototile_index(src);
      br.target = fam.prototile_index(tgt);
      if (br.source < 0) throw LoadError(ctx + ": unknown source prototile '" + src + "'");
      if (br.target < 0) throw LoadError(ctx + ": unknown target prototile '" + tgt + "'");
      br.offset = read_offset(require_value(bt, "offset", ctx), fam.dim, fam.constants, ctx);
      if (const auto ov = bt.values.find("theta"); ov != bt.values.end()) {
        br.theta_override = value_as_number(ov->second, fam.constants, ctx);
        br.has_override = true;
      }
      rule.branches.push_back(br);
    }
    fam.rules.push_back(std::move(rule));
  }
  fam.reindex();
  return fam;
}

TypeHFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_family(buf.str());
}

ValidationReport validate_type_h(const TypeHFamily& fam, double vol_tol) {
  ValidationReport report;
  const int d = fam.dim;

  {
    CheckResult c{"contracting", true, ""};
    for (const SubstitutionRule& rule : fam.rules) {
      if (!(rule.theta > 0.0 && rule.theta < 1.0)) {
        c.passed = false;
        c.witness = "rule '" + rule.id + "' has theta = " + format_double(rule.theta);
        break;
      }
    }
    report.checks.push_back(c);
  }

  {
    CheckResult c{"uniform-scaling", true, ""};
    for (const SubstitutionRule& rule : fam.rules) {
      for (size_t bi = 0; bi < rule.branches.size() && c.passed; ++bi) {
        const Branch& b = rule.branches[bi];
        if (b.has_override && std::abs(b.theta_override - rule.theta) > 1e-12) {
          c.passed = false;
          c.witness = "rule '" + rule.id + "' branch " + std::to_string(bi) + " scales by " +
                      format_double(b.theta_override) + ", rule theta is " +
                      format_double(rule.theta);
        }
      }
      if (!c.passed) break;
    }
    report.checks.push_back(c);
  }

  {
    CheckResult c{"shared-attractor-interior-origin", true, ""};
    for (int p = 0; p < fam.prototile_count() && c.passed; ++p) {
      const double depth = fam.prototiles[p].interior_depth({0.0, 0.0});
      if (depth <= kEps) {
        c.passed = false;
        c.witness = "prototile '" + fam.prototile_ids[p] +
                    "' does not contain the origin in its interior (depth " +
                    format_double(depth) + ")";
      }
    }
    for (const SubstitutionRule& rule : fam.rules) {
      if (!c.passed) break;
      const double thd = std::pow(rule.theta, d);
      for (int v = 0; v < fam.prototile_count() && c.passed; ++v) {
        double covered = 0.0;
        for (int bi : rule.branches_into[v]) {
          const Branch& b = rule.branches[bi];
          covered += thd * fam.prototiles[b.source].volume();
          const TileShape img = fam.prototiles[b.source].transformed(rule.theta, b.offset);
          bool inside = true;
          if (d == 1) {
            inside = img.lo >= fam.prototiles[v].lo - kEps && img.hi <= fam.prototiles[v].hi + kEps;
          } else {
            for (const Vec& vert : img.poly)
              inside = inside && fam.prototiles[v].contains_point(vert, kEps);
          }
          if (!inside) {
            c.passed = false;
            c.witness = "rule '" + rule.id + "' branch " + std::to_string(bi) +
                        " image leaves prototile '" + fam.prototile_ids[v] + "'";
          }
        }
        const double want = fam.prototiles[v].volume();
        if (c.passed && std::abs(covered - want) > vol_tol * want) {
          c.passed = false;
          c.witness = "rule '" + rule.id + "' covers prototile '" + fam.prototile_ids[v] +
                      "' with volume " + format_double(covered) + " instead of " +
                      format_double(want);
        }
      }
    }
    report.checks.push_back(c);
  }

  {
    // Pairwise cell intersections must have dimension <= d-1 on every one-
    // and two-level blowup; two levels exercise every ordered rule pair.
    CheckResult c{"compatibility", true, ""};
    const int nrules = fam.rule_count();
    struct Cell {
      TileShape shape;
      std::string label;
    };
    auto check_cells = [&](const std::vector<Cell>& cells, const std::string& word, int target) {
      for (size_t i = 0; i < cells.size() && c.passed; ++i) {
        for (size_t j = i + 1; j < cells.size() && c.passed; ++j) {
          double vol = 0.0;
          const int dim_ij = intersection_dimension(cells[i].shape, {0, 0}, cells[j].shape,
                                                    {0, 0}, kEps, &vol);
          if (dim_ij >= d) {
            c.passed = false;
            c.witness = "word " + word + ", prototile '" + fam.prototile_ids[target] +
                        "': cells " + cells[i].label + " and " + cells[j].label +
                        " overlap with volume " + format_double(vol);
          }
        }
      }
    };
    for (int r = 0; r < nrules && c.passed; ++r) {
      const SubstitutionRule& rule = fam.rules[r];
      for (int v = 0; v < fam.prototile_count() && c.passed; ++v) {
        std::vector<Cell> cells;
        for (int bi : rule.branches_into[v]) {
          const Branch& b = rule.branches[bi];
          cells.push_back({fam.prototiles[b.source].transformed(rule.theta, b.offset),
                           std::to_string(bi)});
        }
        check_cells(cells, rule.id, v);
      }
    }
    for (int r2 = 0; r2 < nrules && c.passed; ++r2) {
      for (int r1 = 0; r1 < nrules && c.passed; ++r1) {
        const SubstitutionRule& top = fam.rules[r2];
        const SubstitutionRule& bottom = fam.rules[r1];
        for (int v = 0; v < fam.prototile_count() && c.passed; ++v) {
          std::vector<Cell> cells;
          for (int bi : top.branches_into[v]) {
            const Branch& outer = top.branches[bi];
            const AffineContraction fo{d, top.theta, outer.offset};
            for (int bj : bottom.branches_into[outer.source]) {
              const Branch& inner = bottom.branches[bj];
              const AffineContraction fi{d, bottom.theta, inner.offset};
              const AffineContraction comp = fo.after(fi);
              cells.push_back({fam.prototiles[inner.source].transformed(comp.theta, comp.b),
                               std::to_string(bi) + "." + std::to_string(bj)});
            }
          }
          check_cells(cells, bottom.id + "," + top.id, v);
        }
      }
    }
    report.checks.push_back(c);
  }

  return report;
}

std::string serialize_family(const TypeHFamily& fam) {
  std::ostringstream out;
  out << "name = \"" << fam.name << "\"\n";
  for (int p = 0; p < fam.prototile_count(); ++p) {
    const TileShape& sh = fam.prototiles[p];
    out << "\n[[prototile]]\n";
    out << "id = \"" << fam.prototile_ids[p] << "\"\n";
    out << "dim = " << sh.dim << "\n";
    if (sh.dim == 1) {
      out << "interval = [" << format_double(sh.lo) << ", " << format_double(sh.hi) << "]\n";
    } else {
      out << "polygon = [";
      for (size_t i = 0; i < sh.poly.size(); ++i) {
        if (i) out << ", ";
        out << "[" << format_double(sh.poly[i].x) << ", " << format_double(sh.poly[i].y) << "]";
      }
      out << "]\n";
    }
  }
  for (const SubstitutionRule& rule : fam.rules) {
    out << "\n[[rule]]\n";
    out << "id = \"" << rule.id << "\"\n";
    out << "theta = " << format_double(rule.theta) << "\n";
    for (const Branch& b : rule.branches) {
      out << "\n[[rule.branch]]\n";
      out << "source = \"" << fam.prototile_ids[b.source] << "\"\n";
      out << "target = \"" << fam.prototile_ids[b.target] << "\"\n";
      out << "offset = [" << format_double(b.offset.x);
      if (fam.dim == 2) out << ", " << format_double(b.offset.y);
      out << "]\n";
    }
  }
  return out.str();
}

bool family_equal(const TypeHFamily& a, const TypeHFamily& b) {
  if (a.name != b.name || a.dim != b.dim) return false;
  if (a.prototile_ids != b.prototile_ids) return false;
  if (a.prototiles.size() != b.prototiles.size() || a.rules.size() != b.rules.size()) return false;
  for (size_t p = 0; p < a.prototiles.size(); ++p) {
    const TileShape &sa = a.prototiles[p], &sb = b.prototiles[p];
    if (sa.dim != sb.dim) return false;
    if (sa.dim == 1) {
      if (sa.lo != sb.lo || sa.hi != sb.hi) return false;
    } else {
      if (sa.poly.size() != sb.poly.size()) return false;
      for (size_t i = 0; i < sa.poly.size(); ++i)
        if (sa.poly[i].x != sb.poly[i].x || sa.poly[i].y != sb.poly[i].y) return false;
    }
  }
  for (size_t r = 0; r < a.rules.size(); ++r) {
    const SubstitutionRule &ra = a.rules[r], &rb = b.rules[r];
    if (ra.id != rb.id || ra.theta != rb.theta) return false;
    if (ra.branches.size() != rb.branches.size()) return false;
    for (size_t i = 0; i < ra.branches.size(); ++i) {
      const Branch &ba = ra.branches[i], &bb = rb.branches[i];
      if (ba.source != bb.source || ba.target != bb.target) return false;
      if (ba.offset.x != bb.offset.x || ba.offset.y != bb.offset.y) return false;
    }
  }
  return true;
}

TypeHFamily product_family_2d(const TypeHFamily& f, const TypeHFamily& g) {
  if (f.dim != 1 || g.dim != 1)
    throw LoadError("product_family_2d requires one-dimensional factors");
  if (f.rule_count() != g.rule_count())
    throw LoadError("product_family_2d requires equal rule counts");
  TypeHFamily prod;
  prod.name = f.name + "x" + g.name;
  prod.dim = 2;
  const int mg = g.prototile_count();
  for (int i = 0; i < f.prototile_count(); ++i) {
    for (int j = 0; j < mg; ++j) {
      const TileShape &a = f.prototiles[i], &b = g.prototiles[j];
      TileShape rect;
      rect.dim = 2;
      rect.poly = {{a.lo, b.lo}, {a.hi, b.lo}, {a.hi, b.hi}, {a.lo, b.hi}};
      prod.prototile_ids.push_back(f.prototile_ids[i] + "x" + g.prototile_ids[j]);
      prod.prototiles.push_back(std::move(rect));
    }
  }
  for (int r = 0; r < f.rule_count(); ++r) {
    const SubstitutionRule &rf = f.rules[r], &rg = g.rules[r];
    if (std::abs(rf.theta - rg.theta) > 1e-12)
      throw LoadError("product_family_2d: rules '" + rf.id + "' and '" + rg.id +
                      "' have different thetas");
    SubstitutionRule rule;
    rule.id = rf.id + "x" + rg.id;
    rule.theta = rf.theta;
    for (const Branch& bf : rf.branches) {
      for (const Branch& bg : rg.branches) {
        Branch b;
        b.source = bf.source * mg + bg.source;
        b.target = bf.target * mg + bg.target;
        b.offset = {bf.offset.x, bg.offset.x};
        rule.branches.push_back(b);
      }
    }
    prod.rules.push_back(std::move(rule));
  }
  prod.reindex();
  return prod;
}

}  // namespace tilelab
