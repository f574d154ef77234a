#include "tilelab/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tilelab {

namespace {

constexpr std::array<const char*, 12> kPalette = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295"};

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// JSON-safe stand-in for values JSON cannot carry.
ojson number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

ojson vec_json(Vec v, int dim) {
  ojson a = ojson::array();
  a.push_back(v.x);
  if (dim == 2) a.push_back(v.y);
  return a;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open family file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  char out[17];
  std::snprintf(out, sizeof out, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return out;
}

std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long pinned = std::strtoll(epoch, &end, 10);
    if (end != epoch) t = static_cast<std::time_t>(pinned);
  }
  std::tm tm {};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest make_manifest(std::string command, const std::string& family_path,
                          std::uint64_t seed, ojson parameters) {
  RunManifest m;
  m.command = std::move(command);
  m.family_hash = file_hash_hex(family_path);
  m.seed = seed;
  m.parameters = std::move(parameters);
  m.timestamp = utc_timestamp();
  return m;
}

ojson manifest_json(const RunManifest& m) {
  ojson j;
  j["command"] = m.command;
  j["family_hash"] = m.family_hash;
  j["seed"] = m.seed;
  j["parameters"] = m.parameters;
  j["version"] = m.version;
  j["timestamp"] = m.timestamp;
  return j;
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ojson validation_json(const ValidationReport& rep, const RunManifest& m) {
  ojson j;
  j["manifest"] = manifest_json(m);
  j["ok"] = rep.ok();
  ojson checks = ojson::array();
  for (const CheckResult& c : rep.checks) {
    ojson e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    e["witness"] = c.witness;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  return j;
}

ojson lyapunov_json(const LyapunovReport& rep, const RunManifest& m) {
  ojson j;
  j["manifest"] = manifest_json(m);
  j["space"] = rep.space == CocycleSpace::Collared ? "collared" : "uncollared";
  j["dim_space"] = rep.dim_space;
  j["rank"] = rep.rank;
  j["n"] = rep.n;
  j["samples"] = rep.samples;
  j["burn_in"] = rep.burn_in;
  j["exponents"] = rep.exponents;
  j["normalized"] = rep.normalized;
  j["expanding"] = rep.expanding;
  j["standard_error"] = rep.se;
  j["lambda1_word_mean"] = rep.lambda1_word_mean;
  return j;
}

ojson deviation_json(const DeviationReport& rep, int dim, const RunManifest& m) {
  ojson j;
  j["manifest"] = manifest_json(m);
  j["depth"] = rep.depth;

  ojson pred;
  ojson alpha = ojson::array();
  for (const double a : rep.alpha) alpha.push_back(number_or_null(a));
  ojson expo = ojson::array();
  for (const double e : rep.exponents) expo.push_back(number_or_null(e));
  pred["alpha"] = std::move(alpha);
  pred["exponents"] = std::move(expo);
  pred["lambda1"] = rep.lambda1;
  pred["leading_index"] = rep.leading_index;
  pred["boundary_case"] = rep.boundary_case;
  pred["predicted"] = rep.predicted;
  j["prediction"] = std::move(pred);

  ojson env;
  env["slope"] = rep.slope;
  env["points"] = rep.envelope_points;
  j["envelope"] = std::move(env);

  const double tol = 0.05 * dim;
  ojson verdict;
  verdict["comparison"] = rep.boundary_case ? "one_sided" : "two_sided";
  verdict["tolerance"] = tol;
  verdict["within_tolerance"] = rep.boundary_case
                                    ? rep.slope <= rep.predicted + tol
                                    : std::abs(rep.slope - rep.predicted) <= tol;
  j["verdict"] = std::move(verdict);

  ojson series = ojson::array();
  for (const DeviationPoint& p : rep.points) {
    ojson e;
    e["T"] = p.T;
    e["I"] = p.value;
    e["anchors"] = p.anchors;
    e["top_level"] = p.top_level;
    e["level_totals"] = p.level_totals;
    series.push_back(std::move(e));
  }
  j["series"] = std::move(series);

  if (!rep.sub_points.empty()) {
    ojson sub;
    sub["levels"] = rep.sub_levels;
    ojson anchors = ojson::array();
    for (const Vec& t : rep.sub_anchors) anchors.push_back(vec_json(t, dim));
    sub["anchors"] = std::move(anchors);
    ojson pts = ojson::array();
    for (const DeviationPoint& p : rep.sub_points) {
      ojson e;
      e["T"] = p.T;
      e["I"] = p.value;
      e["anchors"] = p.anchors;
      pts.push_back(std::move(e));
    }
    sub["series"] = std::move(pts);
    sub["slope"] = rep.sub_slope;
    j["subsequence"] = std::move(sub);
  }
  return j;
}

std::string deviation_csv(const DeviationReport& rep, const RunManifest& m) {
  std::string out = "# " + manifest_json(m).dump() + "\n";
  out += "T,I,logT,logAbsI,level_counts_json\n";
  for (const DeviationPoint& p : rep.points) {
    out += fmt_double(p.T);
    out += ',';
    out += fmt_double(p.value);
    out += ',';
    out += fmt_double(std::log(p.T));
    out += ',';
    out += fmt_double(p.value == 0.0 ? -std::numeric_limits<double>::infinity()
                                     : std::log(std::abs(p.value)));
    out += ",\"";
    out += ojson(p.level_totals).dump();
    out += "\"\n";
  }
  return out;
}

ojson frequencies_json(const FrequencyReport& rep, const TypeHFamily& fam,
                       const RunManifest& m) {
  ojson j;
  j["manifest"] = manifest_json(m);
  j["prototiles"] = fam.prototile_ids;
  j["depths"] = rep.depths;
  j["freqs"] = rep.freqs;
  j["cross_path_discrepancy"] = rep.cross_path_discrepancy;
  j["minimal_precheck"] = rep.minimal_precheck;
  if (!rep.collared_freqs.empty()) j["collared_freqs"] = rep.collared_freqs;
  return j;
}

ojson boundary_json(const BoundaryReport& rep, const RunManifest& m) {
  ojson j;
  j["manifest"] = manifest_json(m);
  j["kmax"] = rep.kmax;
  j["samples"] = rep.samples;
  j["mass"] = rep.mass;
  j["hits"] = rep.hits;
  j["rate"] = rep.rate;
  j["summable"] = rep.rate < 1.0;
  j["partial_sum"] = rep.partial_sum;
  j["fit_points"] = rep.fit_points;
  return j;
}

std::string patch_jsonl(const std::vector<PlacedTile>& tiles, int dim, const RunManifest& m) {
  std::vector<PlacedTile> sorted = tiles;
  std::sort(sorted.begin(), sorted.end(),
            [](const PlacedTile& a, const PlacedTile& b) { return snap_less(a.t, b.t); });
  ojson head;
  head["manifest"] = manifest_json(m);
  std::string out = head.dump() + "\n";
  for (const PlacedTile& tile : sorted) {
    ojson line;
    line["proto"] = tile.proto;
    line["collared"] = tile.collared >= 0 ? ojson(tile.collared) : ojson(nullptr);
    line["x"] = vec_json(tile.t, dim);
    out += line.dump();
    out += '\n';
  }
  return out;
}

LoadedPatch parse_patch_jsonl(const std::string& text) {
  LoadedPatch patch;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const ojson j = ojson::parse(line);
    if (!saw_header) {
      if (!j.contains("manifest"))
        throw std::runtime_error("patch file lacks its manifest header line");
      patch.manifest = j["manifest"];
      saw_header = true;
      continue;
    }
    PlacedTile tile;
    tile.proto = j.at("proto").get<int>();
    tile.collared = j.at("collared").is_null() ? -1 : j.at("collared").get<int>();
    const ojson& x = j.at("x");
    patch.dim = static_cast<int>(x.size());
    tile.t.x = x.at(0).get<double>();
    if (patch.dim == 2) tile.t.y = x.at(1).get<double>();
    patch.tiles.push_back(tile);
  }
  if (!saw_header) throw std::runtime_error("patch file lacks its manifest header line");
  return patch;
}

std::string render_svg(const std::vector<PlacedTile>& tiles, const TypeHFamily& fam,
                       bool color_by_proto, const RunManifest& m) {
  if (tiles.empty()) throw std::runtime_error("cannot render an empty patch");

  std::vector<PlacedTile> sorted = tiles;
  std::sort(sorted.begin(), sorted.end(),
            [](const PlacedTile& a, const PlacedTile& b) { return snap_less(a.t, b.t); });

  Aabb box {};
  bool first = true;
  std::vector<std::vector<Vec>> polys;
  polys.reserve(sorted.size());
  for (const PlacedTile& tile : sorted) {
    const TileShape& shape = fam.prototiles[tile.proto];
    std::vector<Vec> pts;
    if (fam.dim == 1) {
      const double lo = shape.lo + tile.t.x;
      const double hi = shape.hi + tile.t.x;
      pts = {{lo, 0.0}, {hi, 0.0}, {hi, 1.0}, {lo, 1.0}};
    } else {
      pts.reserve(shape.poly.size());
      for (const Vec& v : shape.poly) pts.push_back(v + tile.t);
    }
    for (const Vec& v : pts) {
      if (first) {
        box.lo = box.hi = v;
        first = false;
      } else {
        box.lo.x = std::min(box.lo.x, v.x);
        box.lo.y = std::min(box.lo.y, v.y);
        box.hi.x = std::max(box.hi.x, v.x);
        box.hi.y = std::max(box.hi.y, v.y);
      }
    }
    polys.push_back(std::move(pts));
  }

  // "--" terminates an XML comment early; keep the manifest dump clear of it.
  std::string note = manifest_json(m).dump();
  for (std::size_t pos = 0; (pos = note.find("--", pos)) != std::string::npos;)
    note.replace(pos, 2, "- -");

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"";
  svg += fmt6(box.lo.x) + " " + fmt6(box.lo.y) + " " + fmt6(box.hi.x - box.lo.x) + " " +
         fmt6(box.hi.y - box.lo.y) + "\">\n";
  svg += "<!-- manifest: " + note + " -->\n";
  svg += "<g stroke=\"#1a1a1a\" stroke-width=\"" + fmt6(0.02) + "\">\n";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const PlacedTile& tile = sorted[i];
    const int cls = (!color_by_proto && tile.collared >= 0) ? tile.collared : tile.proto;
    svg += "<polygon points=\"";
    for (std::size_t k = 0; k < polys[i].size(); ++k) {
      if (k) svg += ' ';
      svg += fmt6(polys[i][k].x) + "," + fmt6(polys[i][k].y);
    }
    svg += "\" fill=\"";
    svg += kPalette[static_cast<std::size_t>(cls) % kPalette.size()];
    svg += "\"/>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace tilelab
