#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "tilelab/cocycle.hpp"
#include "tilelab/deviation.hpp"
#include "tilelab/ergodic.hpp"
#include "tilelab/family.hpp"

namespace tilelab {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance stamp embedded in every artifact. Two runs with equal manifests
// must produce byte-identical files; the timestamp honors SOURCE_DATE_EPOCH
// so pinning it pins the whole artifact.
struct RunManifest {
  std::string command;
  std::string family_hash;  // fnv1a-64 over the family file bytes, hex
  std::uint64_t seed = 0;
  ojson parameters;
  std::string version = kToolVersion;
  std::string timestamp;
};

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::string file_hash_hex(const std::string& path);
std::string utc_timestamp();

RunManifest make_manifest(std::string command, const std::string& family_path,
                          std::uint64_t seed, ojson parameters);
ojson manifest_json(const RunManifest& m);

// Shortest round-trip decimal form; the one number format shared by the CSV
// and SVG writers.
std::string fmt_double(double v);

ojson validation_json(const ValidationReport& rep, const RunManifest& m);
ojson lyapunov_json(const LyapunovReport& rep, const RunManifest& m);
ojson deviation_json(const DeviationReport& rep, int dim, const RunManifest& m);
std::string deviation_csv(const DeviationReport& rep, const RunManifest& m);
ojson frequencies_json(const FrequencyReport& rep, const TypeHFamily& fam,
                       const RunManifest& m);
ojson boundary_json(const BoundaryReport& rep, const RunManifest& m);

// One JSON object per line: a manifest header, then tiles sorted by snapped
// translation: {"proto": i, "collared": j|null, "x": [..]}.
std::string patch_jsonl(const std::vector<PlacedTile>& tiles, int dim, const RunManifest& m);

struct LoadedPatch {
  ojson manifest;
  std::vector<PlacedTile> tiles;
  int dim = 1;
};

LoadedPatch parse_patch_jsonl(const std::string& text);

// One polygon per tile, deterministic order (snapped translation), fill from
// a fixed 12-color palette keyed by collared class when present (and colors
// are not forced to prototiles), else by prototile. 1-d patches render as a
// unit-height strip. Coordinates carry 6 decimals; viewBox is the patch
// bounding box.
std::string render_svg(const std::vector<PlacedTile>& tiles, const TypeHFamily& fam,
                       bool color_by_proto, const RunManifest& m);

}  // namespace tilelab
