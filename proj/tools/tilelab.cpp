// tilelab: substitution tilings from random rule sequences.
//
// Subcommands expand approximant patches, render them, estimate Lyapunov
// spectra of the renormalization cocycle, measure deviation exponents of
// ergodic integrals, and probe patch frequencies and boundary-path mass.
// Every artifact embeds a run manifest; equal manifests give equal bytes.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "tilelab/collar.hpp"
#include "tilelab/deviation.hpp"
#include "tilelab/ergodic.hpp"
#include "tilelab/report.hpp"

using namespace tilelab;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << bytes;
  if (!out) throw std::runtime_error("short write on " + path);
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> w;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    size_t used = 0;
    w.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::runtime_error("bad weight '" + item + "'");
  }
  if (w.empty()) throw std::runtime_error("empty weight list");
  return w;
}

// 1-based rule digits, the same syntax SequenceLaw::parse uses after "fixed:".
std::vector<int> parse_word(const std::string& text, int rule_count) {
  std::vector<int> word;
  for (const char ch : text) {
    if (ch < '1' || ch > '9') throw std::runtime_error("word must use digits 1..9");
    const int r = ch - '1';
    if (r >= rule_count) throw std::runtime_error("word digit exceeds the rule count");
    word.push_back(r);
  }
  if (word.empty()) throw std::runtime_error("empty word");
  return word;
}

std::string json_bytes(const ojson& j) { return j.dump(2) + "\n"; }

struct CommonArgs {
  std::string family;
  std::string law_text = "fixed:1";
  std::uint64_t seed = 0;
};

// Sub-seeds are fixed offsets of --seed: +0 word/sampling, +1 path, +2 collar.
constexpr std::uint64_t kPathSeedOffset = 1;
constexpr std::uint64_t kCollarSeedOffset = 2;

int run_validate(const std::string& family_path, const std::string& out_path) {
  TypeHFamily fam;
  try {
    fam = load_family(family_path);
  } catch (const LoadError& e) {
    std::cout << "FAIL load: " << e.what() << "\n";
    return 1;
  }
  const ValidationReport rep = validate_type_h(fam);
  for (const CheckResult& c : rep.checks) {
    if (c.passed)
      std::cout << "ok   " << c.name << "\n";
    else
      std::cout << "FAIL " << c.name << ": " << c.witness << "\n";
  }
  if (!out_path.empty()) {
    ojson params;
    params["family"] = family_path;
    const RunManifest m = make_manifest("validate", family_path, 0, params);
    write_file(out_path, json_bytes(validation_json(rep, m)));
  }
  return rep.ok() ? 0 : 1;
}

int run_expand(const CommonArgs& args, const std::string& word_text, int depth,
               const std::string& policy_text, int start, bool collar,
               const std::string& out_path) {
  const TypeHFamily fam = load_family(args.family);
  SequenceLaw law;
  if (!word_text.empty())
    law = SequenceLaw::fixed(parse_word(word_text, fam.rule_count()));
  else
    law = SequenceLaw::parse(args.law_text, fam.rule_count());

  const int pad = collar ? 12 : 0;
  const std::vector<int> word = law.realize(depth + pad, args.seed);
  auto h = std::make_shared<SupertileHierarchy>(fam, word);
  const PathSpec spec{start, {}, path_policy_parse(policy_text),
                      args.seed + kPathSeedOffset};

  ojson params;
  params["family"] = args.family;
  params["word"] = word_text;
  params["law"] = word_text.empty() ? args.law_text : "";
  params["depth"] = depth;
  params["path"] = policy_text;
  params["start"] = start;
  params["collar"] = collar;
  const RunManifest m = make_manifest("expand", args.family, args.seed, params);

  std::vector<PlacedTile> tiles;
  if (collar) {
    const CollaredSystem sys =
        build_collared_system(fam, law, args.seed + kCollarSeedOffset);
    const PatchContext ctx = make_patch(h, spec, depth, &sys);
    tiles = flatten_typed(ctx);
  } else {
    tiles = approximant(h, spec, depth).flatten();
  }

  write_file(out_path, patch_jsonl(tiles, fam.dim, m));
  std::cout << "wrote " << tiles.size() << " tiles to " << out_path << "\n";
  return 0;
}

int run_render(const std::string& patch_path, const std::string& family_override,
               bool by_proto, const std::string& out_path) {
  const LoadedPatch patch = parse_patch_jsonl(read_file(patch_path));

  std::string family_path = family_override;
  if (family_path.empty()) {
    if (!patch.manifest.contains("parameters") ||
        !patch.manifest["parameters"].contains("family"))
      throw std::runtime_error("patch manifest records no family file; pass --family");
    family_path = patch.manifest["parameters"]["family"].get<std::string>();
    const std::string hash = file_hash_hex(family_path);
    if (patch.manifest.contains("family_hash") &&
        hash != patch.manifest["family_hash"].get<std::string>())
      throw std::runtime_error("family file " + family_path +
                               " changed since the patch was written; pass --family");
  }
  const TypeHFamily fam = load_family(family_path);
  if (fam.dim != patch.dim)
    throw std::runtime_error("patch dimension does not match the family");
  for (const PlacedTile& t : patch.tiles)
    if (t.proto < 0 || t.proto >= fam.prototile_count())
      throw std::runtime_error("patch names a prototile the family lacks");

  ojson params;
  params["patch"] = patch_path;
  params["patch_hash"] = file_hash_hex(patch_path);
  params["family"] = family_path;
  params["by"] = by_proto ? "proto" : "collar";
  const RunManifest m = make_manifest("render", family_path, 0, params);

  write_file(out_path, render_svg(patch.tiles, fam, by_proto, m));
  std::cout << "wrote " << patch.tiles.size() << " polygons to " << out_path << "\n";
  return 0;
}

int run_lyapunov(const CommonArgs& args, int n, int samples, const std::string& space_text,
                 const std::string& out_path) {
  const TypeHFamily fam = load_family(args.family);
  const SequenceLaw law = SequenceLaw::parse(args.law_text, fam.rule_count());
  const CocycleSpace space = cocycle_space_parse(space_text);

  CollaredSystem sys;
  const CollaredSystem* sys_ptr = nullptr;
  if (space == CocycleSpace::Collared) {
    sys = build_collared_system(fam, law, args.seed + kCollarSeedOffset);
    sys_ptr = &sys;
  }
  const LyapunovReport rep = lyapunov_spectrum(fam, law, n, samples, args.seed, space, sys_ptr);

  std::cout << "exponents:";
  for (const double e : rep.exponents) std::cout << " " << fmt_double(e);
  std::cout << "\nnormalized:";
  for (const double v : rep.normalized) std::cout << " " << fmt_double(v);
  std::cout << "\nlambda1 word mean " << fmt_double(rep.lambda1_word_mean) << "\n";

  if (!out_path.empty()) {
    ojson params;
    params["family"] = args.family;
    params["law"] = args.law_text;
    params["n"] = n;
    params["samples"] = samples;
    params["space"] = space_text;
    const RunManifest m = make_manifest("lyapunov", args.family, args.seed, params);
    write_file(out_path, json_bytes(lyapunov_json(rep, m)));
  }
  return 0;
}

int run_deviate(const CommonArgs& args, const std::string& beta_text,
                const std::string& region_text, double t_min, double t_max,
                const std::string& policy_text, int start, bool subseq,
                const std::string& space_text, const std::string& out_base) {
  const TypeHFamily fam = load_family(args.family);
  const SequenceLaw law = SequenceLaw::parse(args.law_text, fam.rule_count());
  const CocycleSpace space = cocycle_space_parse(space_text);

  CollaredSystem sys;
  const CollaredSystem* sys_ptr = nullptr;
  if (space == CocycleSpace::Collared) {
    sys = build_collared_system(fam, law, args.seed + kCollarSeedOffset);
    sys_ptr = &sys;
  }

  Observable beta{space, parse_weights(beta_text)};
  const std::size_t want = space == CocycleSpace::Collared
                               ? static_cast<std::size_t>(sys.set.count())
                               : static_cast<std::size_t>(fam.prototile_count());
  if (beta.weights.size() != want)
    throw std::runtime_error("--beta needs " + std::to_string(want) + " weights, got " +
                             std::to_string(beta.weights.size()));

  DeviationParams params;
  params.base = region_parse(region_text, fam.dim);
  params.t_min = t_min;
  params.t_max = t_max;
  params.subsequence = subseq;

  const PathSpec path{start, {}, path_policy_parse(policy_text),
                      args.seed + kPathSeedOffset};
  const DeviationReport rep = deviation_series(fam, law, args.seed, path, beta, params, sys_ptr);

  std::cout << "envelope slope " << fmt_double(rep.slope) << " over " << rep.envelope_points
            << " window maxima; predicted " << fmt_double(rep.predicted)
            << (rep.boundary_case ? " (boundary regime)" : "") << "\n";
  if (subseq) std::cout << "subsequence slope " << fmt_double(rep.sub_slope) << "\n";

  ojson jparams;
  jparams["family"] = args.family;
  jparams["law"] = args.law_text;
  jparams["beta"] = beta_text;
  jparams["region"] = region_text;
  jparams["tmin"] = t_min;
  jparams["tmax"] = t_max;
  jparams["path"] = policy_text;
  jparams["start"] = start;
  jparams["subseq"] = subseq;
  jparams["space"] = space_text;
  const RunManifest m = make_manifest("deviate", args.family, args.seed, jparams);

  std::string base = out_base;
  if (base.size() > 5 && base.rfind(".json") == base.size() - 5)
    base.resize(base.size() - 5);
  write_file(base + ".json", json_bytes(deviation_json(rep, fam.dim, m)));
  write_file(base + ".csv", deviation_csv(rep, m));
  std::cout << "wrote " << base << ".json and " << base << ".csv\n";
  return 0;
}

int run_freqs(const CommonArgs& args, int depth, bool collar, const std::string& out_path) {
  const TypeHFamily fam = load_family(args.family);
  const SequenceLaw law = SequenceLaw::parse(args.law_text, fam.rule_count());

  CollaredSystem sys;
  const CollaredSystem* sys_ptr = nullptr;
  if (collar) {
    sys = build_collared_system(fam, law, args.seed + kCollarSeedOffset);
    sys_ptr = &sys;
  }
  const FrequencyReport rep = patch_frequencies(fam, law, args.seed, depth, sys_ptr);

  const std::vector<double>& top = rep.freqs.back();
  for (int i = 0; i < fam.prototile_count(); ++i)
    std::cout << fam.prototile_ids[i] << " " << fmt_double(top[i]) << "\n";
  std::cout << "cross-path discrepancy " << fmt_double(rep.cross_path_discrepancy) << "\n";

  if (!out_path.empty()) {
    ojson params;
    params["family"] = args.family;
    params["law"] = args.law_text;
    params["depth"] = depth;
    params["collar"] = collar;
    const RunManifest m = make_manifest("freqs", args.family, args.seed, params);
    write_file(out_path, json_bytes(frequencies_json(rep, fam, m)));
  }
  return 0;
}

int run_boundary(const CommonArgs& args, int kmax, int samples, const std::string& out_path) {
  const TypeHFamily fam = load_family(args.family);
  const SequenceLaw law = SequenceLaw::parse(args.law_text, fam.rule_count());
  const BoundaryReport rep = boundary_measure_decay(fam, law, args.seed, kmax, samples);

  std::cout << "geometric rate " << fmt_double(rep.rate) << " over " << rep.fit_points
            << " levels, partial sum " << fmt_double(rep.partial_sum) << "\n";

  if (!out_path.empty()) {
    ojson params;
    params["family"] = args.family;
    params["law"] = args.law_text;
    params["kmax"] = kmax;
    params["samples"] = samples;
    const RunManifest m = make_manifest("boundary", args.family, args.seed, params);
    write_file(out_path, json_bytes(boundary_json(rep, m)));
  }
  return 0;
}

int run_product(const std::string& a_path, const std::string& b_path, const std::string& name,
                const std::string& out_path) {
  const TypeHFamily a = load_family(a_path);
  const TypeHFamily b = load_family(b_path);
  TypeHFamily prod = product_family_2d(a, b);
  if (!name.empty()) prod.name = name;

  const ValidationReport rep = validate_type_h(prod);
  if (!rep.ok()) {
    for (const CheckResult& c : rep.checks)
      if (!c.passed) std::cout << "FAIL " << c.name << ": " << c.witness << "\n";
    return 1;
  }
  write_file(out_path, serialize_family(prod));
  std::cout << "wrote " << prod.name << " (" << prod.prototile_count() << " prototiles, "
            << prod.rule_count() << " rules) to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"substitution tilings, renormalization cocycles, deviation measurements"};
  app.require_subcommand(1);

  CommonArgs common;

  // validate
  auto* validate = app.add_subcommand("validate", "run the structural family checks");
  std::string v_out;
  validate->add_option("family", common.family, "family TOML file")->required();
  validate->add_option("--out", v_out, "write the check report as JSON");

  // expand
  auto* expand = app.add_subcommand("expand", "blow up an approximant patch");
  std::string e_word, e_policy = "random", e_out = "patch.jsonl";
  int e_depth = 4, e_start = 0;
  bool e_collar = false;
  expand->add_option("family", common.family, "family TOML file")->required();
  expand->add_option("--word", e_word, "rule word, digits 1..9, cycled to depth");
  expand->add_option("--law", common.law_text, "fixed:.. | periodic:.. | bernoulli:p,..");
  expand->add_option("--depth", e_depth, "blowup level")->check(CLI::PositiveNumber);
  expand->add_option("--seed", common.seed, "master seed");
  expand->add_option("--path", e_policy, "path policy: leftmost|random|cyclic");
  expand->add_option("--start", e_start, "starting prototile index");
  expand->add_flag("--collar", e_collar, "attach collared class indices");
  expand->add_option("--out", e_out, "output patch JSONL");

  // render
  auto* render = app.add_subcommand("render", "render a patch file as SVG");
  std::string r_patch, r_family, r_out = "patch.svg";
  bool r_by_proto = false;
  render->add_option("patch", r_patch, "patch JSONL from expand")->required();
  render->add_option("--family", r_family, "family TOML override");
  render->add_flag("--by-proto", r_by_proto, "color by prototile even when collared");
  render->add_option("--out", r_out, "output SVG");

  // lyapunov
  auto* lyap = app.add_subcommand("lyapunov", "Lyapunov spectrum of the cocycle");
  std::string l_space = "uncollared", l_out;
  int l_n = 200, l_samples = 1;
  lyap->add_option("family", common.family, "family TOML file")->required();
  lyap->add_option("--law", common.law_text, "rule sequence law");
  lyap->add_option("--n", l_n, "word length")->check(CLI::PositiveNumber);
  lyap->add_option("--samples", l_samples, "independent words")->check(CLI::PositiveNumber);
  lyap->add_option("--seed", common.seed, "master seed");
  lyap->add_option("--space", l_space, "uncollared|collared");
  lyap->add_option("--out", l_out, "write the report as JSON");

  // deviate
  auto* dev = app.add_subcommand("deviate", "deviation of ergodic integrals");
  std::string d_beta, d_region = "interval:1", d_policy = "random", d_space = "uncollared";
  std::string d_out = "dev";
  double d_tmin = 4.0, d_tmax = 1024.0;
  int d_start = 0;
  bool d_subseq = false;
  dev->add_option("family", common.family, "family TOML file")->required();
  dev->add_option("--law", common.law_text, "rule sequence law");
  dev->add_option("--beta", d_beta, "observable weights, comma separated")->required();
  dev->add_option("--region", d_region, "interval:h | box:hx,hy | disk:r, optional @center");
  dev->add_option("--tmin", d_tmin, "smallest dilation");
  dev->add_option("--tmax", d_tmax, "largest dilation");
  dev->add_option("--seed", common.seed, "master seed");
  dev->add_option("--path", d_policy, "path policy: leftmost|random|cyclic");
  dev->add_option("--start", d_start, "starting prototile index");
  dev->add_flag("--subseq", d_subseq, "also measure the recurrence subsequence");
  dev->add_option("--space", d_space, "uncollared|collared");
  dev->add_option("--out", d_out, "output base name; writes .json and .csv");

  // freqs
  auto* freqs = app.add_subcommand("freqs", "patch frequencies along deep paths");
  std::string f_out;
  int f_depth = 20;
  bool f_collar = false;
  freqs->add_option("family", common.family, "family TOML file")->required();
  freqs->add_option("--law", common.law_text, "rule sequence law");
  freqs->add_option("--depth", f_depth, "patch depth")->check(CLI::PositiveNumber);
  freqs->add_option("--seed", common.seed, "master seed");
  freqs->add_flag("--collar", f_collar, "also report collared class frequencies");
  freqs->add_option("--out", f_out, "write the report as JSON");

  // boundary
  auto* bnd = app.add_subcommand("boundary", "boundary-path mass per level");
  std::string b_out;
  int b_kmax = 12, b_samples = 20000;
  bnd->add_option("family", common.family, "family TOML file")->required();
  bnd->add_option("--law", common.law_text, "rule sequence law");
  bnd->add_option("--kmax", b_kmax, "deepest level")->check(CLI::PositiveNumber);
  bnd->add_option("--samples", b_samples, "Monte Carlo paths")->check(CLI::PositiveNumber);
  bnd->add_option("--seed", common.seed, "master seed");
  bnd->add_option("--out", b_out, "write the report as JSON");

  // product
  auto* prod = app.add_subcommand("product", "tensor product of two 1-d families");
  std::string p_a, p_b, p_name, p_out = "product.toml";
  prod->add_option("first", p_a, "first 1-d family")->required();
  prod->add_option("second", p_b, "second 1-d family")->required();
  prod->add_option("--name", p_name, "name of the product family");
  prod->add_option("--out", p_out, "output family TOML");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) return run_validate(common.family, v_out);
    if (*expand) {
      if (!e_word.empty() && expand->count("--law"))
        throw std::runtime_error("--word and --law are mutually exclusive");
      return run_expand(common, e_word, e_depth, e_policy, e_start, e_collar, e_out);
    }
    if (*render) return run_render(r_patch, r_family, r_by_proto, r_out);
    if (*lyap) return run_lyapunov(common, l_n, l_samples, l_space, l_out);
    if (*dev)
      return run_deviate(common, d_beta, d_region, d_tmin, d_tmax, d_policy, d_start,
                         d_subseq, d_space, d_out);
    if (*freqs) return run_freqs(common, f_depth, f_collar, f_out);
    if (*bnd) return run_boundary(common, b_kmax, b_samples, b_out);
    if (*prod) return run_product(p_a, p_b, p_name, p_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
