// Acceptance gate: one line per numbered criterion, nonzero exit when any
// fails. Criteria with a stated time budget also fail when they overrun it.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "tilelab/bratteli.hpp"
#include "tilelab/cocycle.hpp"
#include "tilelab/collar.hpp"
#include "tilelab/deviation.hpp"
#include "tilelab/ergodic.hpp"
#include "tilelab/family.hpp"
#include "tilelab/region.hpp"
#include "tilelab/rng.hpp"

using namespace tilelab;

namespace {

const std::vector<std::string> kFixtures = {"fib1d.toml", "four1d.toml", "degenerate1d.toml",
                                            "prod2d.toml"};

std::vector<int> alternating_word(const TypeHFamily& fam, int length) {
  std::vector<int> w;
  for (int i = 0; i < length; ++i) w.push_back(i % fam.rule_count());
  return w;
}

// tally[k][v][i]: prototile-i leaves of the level-k type-v supertile along
// the fixture's alternating word, enumerated tile by tile.
using LeafTally = std::vector<std::vector<std::vector<std::int64_t>>>;

const LeafTally& leaf_tally(const std::string& name) {
  static std::map<std::string, LeafTally> cache;
  const auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  const TypeHFamily fam = load_family(oracles::fixture(name));
  const int kmax = 6;
  auto h = std::make_shared<SupertileHierarchy>(fam, alternating_word(fam, kmax));
  LeafTally tally(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    tally[k].assign(fam.prototile_count(),
                    std::vector<std::int64_t>(fam.prototile_count(), 0));
    for (int v = 0; v < fam.prototile_count(); ++v)
      h->visit_leaves(k, v, Vec{}, [&](const PlacedTile& leaf) { ++tally[k][v][leaf.proto]; });
  }
  return cache.emplace(name, std::move(tally)).first->second;
}

struct Check {
  bool pass = true;
  std::string why;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (!pass) why += "; ";
    pass = false;
    why += what;
  }
};

void expect_close(Check& c, const std::string& what, double got, double want, double tol) {
  if (std::fabs(got - want) <= tol) return;
  std::ostringstream o;
  o << what << ": got " << got << ", want " << want << " within " << tol;
  c.expect(false, o.str());
}

int g_failed = 0;

void criterion(int id, const char* label, double limit_s,
               const std::function<void(Check&)>& fn) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fn(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    std::ostringstream o;
    o << "took " << secs << " s, budget " << limit_s << " s";
    c.expect(false, o.str());
  }
  std::printf("criterion %2d [%s] %s (%.2f s)%s%s\n", id, label, c.pass ? "PASS" : "FAIL",
              secs, c.pass ? "" : " ", c.why.c_str());
  std::fflush(stdout);
  if (!c.pass) ++g_failed;
}

void c1_validation(Check& c) {
  for (const std::string& name : kFixtures) {
    const ValidationReport rep = validate_type_h(load_family(oracles::fixture(name)));
    c.expect(rep.ok(), name + " should pass all structural checks");
  }
  const std::pair<const char*, const char*> broken[] = {
      {"broken_theta.toml", "uniform-scaling"},
      {"broken_origin.toml", "shared-attractor-interior-origin"},
      {"broken_overlap.toml", "compatibility"},
  };
  for (const auto& [name, check] : broken) {
    const ValidationReport rep = validate_type_h(load_family(oracles::fixture(name)));
    c.expect(!rep.ok(), std::string(name) + " should fail");
    const CheckResult* r = rep.find(check);
    c.expect(r != nullptr && !r->passed,
             std::string(name) + " should fail the " + check + " check");
  }
}

void c2_counting(Check& c) {
  for (const std::string& name : kFixtures) {
    const TypeHFamily fam = load_family(oracles::fixture(name));
    const std::vector<int> word = alternating_word(fam, 6);
    const LeafTally& tally = leaf_tally(name);
    auto h = std::make_shared<SupertileHierarchy>(fam, word);
    for (int k = 1; k <= 6; ++k) {
      const IntMatrix prod = oracles::word_product(fam, word, k);
      for (int v = 0; v < fam.prototile_count(); ++v)
        for (int i = 0; i < fam.prototile_count(); ++i)
          if (tally[k][v][i] != prod[v][i]) {
            std::ostringstream o;
            o << name << " k=" << k << " type=" << v << " proto=" << i << ": enumerated "
              << tally[k][v][i] << ", matrix product " << prod[v][i];
            c.expect(false, o.str());
            return;
          }
      const Approximant ap = approximant(h, PathSpec{0, {}, PathPolicy::SeededRandom, 11}, k);
      std::int64_t row_sum = 0;
      for (const std::int64_t n : prod[ap.root_type]) row_sum += n;
      c.expect(ap.leaf_count() == row_sum,
               name + " approximant leaf count at k=" + std::to_string(k));
    }
  }
}

void c3_conjugacy(Check& c) {
  for (const std::string& name : kFixtures) {
    const TypeHFamily fam = load_family(oracles::fixture(name));
    const std::vector<int> word = alternating_word(fam, 6);
    auto h = std::make_shared<SupertileHierarchy>(fam, word);
    const double theta = fam.rules[word[0]].theta;
    Rng rng(131);
    for (int trial = 0; trial < 20; ++trial) {
      const PathSpec spec{0, {}, PathPolicy::SeededRandom, static_cast<std::uint64_t>(trial)};
      const Approximant ap = approximant(h, spec, 2 + trial % 3);
      const PatchWindow w = window_from(ap);
      const Vec t{rng.uniform() * 4 - 2, fam.dim == 2 ? rng.uniform() * 4 - 2 : 0.0};
      const PatchWindow lhs = renormalize_patch(translate(w, t), fam, word[0]);
      PatchWindow rhs = renormalize_patch(w, fam, word[0]);
      rhs = translate(rhs, theta * t);
      if (!tiles_equal(lhs.tiles, rhs.tiles)) {
        std::ostringstream o;
        o << name << " trial " << trial << ": renormalize then translate disagrees";
        c.expect(false, o.str());
        return;
      }
    }
  }
}

struct SpectrumRun {
  std::string name;
  LyapunovReport rep;
};

const std::vector<SpectrumRun>& spectrum_runs() {
  static std::vector<SpectrumRun> runs;
  if (!runs.empty()) return runs;
  const TypeHFamily four = load_family(oracles::fixture("four1d.toml"));
  runs.push_back({"four1d F1", lyapunov_spectrum(four, SequenceLaw::fixed({0}), 40, 1, 1)});
  runs.push_back({"fib1d", lyapunov_spectrum(load_family(oracles::fixture("fib1d.toml")),
                                             SequenceLaw::fixed({0}), 40, 1, 1)});
  runs.push_back({"prod2d", lyapunov_spectrum(load_family(oracles::fixture("prod2d.toml")),
                                              SequenceLaw::fixed({0}), 40, 1, 1)});
  runs.push_back(
      {"four1d bernoulli", lyapunov_spectrum(four, SequenceLaw::bernoulli({0.5, 0.5}), 200, 200, 9)});
  runs.push_back({"degenerate1d", lyapunov_spectrum(load_family(oracles::fixture("degenerate1d.toml")),
                                                    SequenceLaw::fixed({0}), 40, 1, 1)});
  return runs;
}

void c4_lyapunov(Check& c) {
  const auto& runs = spectrum_runs();
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const std::map<std::string, std::vector<double>> exact = {
      {"four1d F1", {std::log(4.0), std::log(2.0)}},
      {"fib1d", {std::log(phi), -std::log(phi)}},
      {"prod2d", {std::log(16.0), std::log(8.0), std::log(8.0), std::log(4.0)}},
  };
  for (const SpectrumRun& run : runs) {
    const auto it = exact.find(run.name);
    if (it == exact.end()) continue;
    c.expect(run.rep.exponents.size() == it->second.size(), run.name + " spectrum size");
    for (size_t i = 0; i < it->second.size() && i < run.rep.exponents.size(); ++i)
      expect_close(c, run.name + " exponent " + std::to_string(i), run.rep.exponents[i],
                   it->second[i], 1e-6);
  }
  const LyapunovReport& mixed = runs[3].rep;
  const double targets[] = {std::log(4.0), std::log(2.0)};
  for (int i = 0; i < 2; ++i) {
    const double window = 3.0 * mixed.se[i] + 1e-9;
    expect_close(c, "four1d bernoulli exponent " + std::to_string(i), mixed.exponents[i],
                 targets[i], window);
  }
}

void c5_lambda1(Check& c) {
  for (const SpectrumRun& run : spectrum_runs())
    expect_close(c, run.name + " leading exponent vs word mean", run.rep.exponents[0],
                 run.rep.lambda1_word_mean, 1e-6);
}

void c6_cocycle_geometry(Check& c) {
  for (const std::string& name : kFixtures) {
    const TypeHFamily fam = load_family(oracles::fixture(name));
    const std::vector<int> word = alternating_word(fam, 6);
    std::vector<IntMatrix> mats;
    for (int r = 0; r < fam.rule_count(); ++r) mats.push_back(transition_matrix(fam, r));
    const LeafTally& tally = leaf_tally(name);
    const int m = fam.prototile_count();
    std::vector<std::vector<std::int64_t>> betas;
    for (int i = 0; i < m; ++i) {
      std::vector<std::int64_t> unit(m, 0);
      unit[i] = 1;
      betas.push_back(std::move(unit));
    }
    std::vector<std::int64_t> alternating(m);
    for (int i = 0; i < m; ++i) alternating[i] = (i % 2 ? -1 : 1) * (i + 1);
    betas.push_back(std::move(alternating));
    for (int n = 1; n <= 6; ++n)
      for (const auto& beta : betas) {
        const std::vector<std::int64_t> pushed = cocycle_apply(mats, word, n, beta);
        for (int v = 0; v < m; ++v) {
          std::int64_t geom = 0;
          for (int i = 0; i < m; ++i) geom += tally[n][v][i] * beta[i];
          if (pushed[v] != geom) {
            std::ostringstream o;
            o << name << " n=" << n << " type=" << v << ": pushed " << pushed[v]
              << ", anchor-weighted " << geom;
            c.expect(false, o.str());
            return;
          }
        }
      }
  }
}

void c7_deviation(Check& c) {
  const PathSpec path{0, {}, PathPolicy::SeededRandom, 3};
  {
    const TypeHFamily four = load_family(oracles::fixture("four1d.toml"));
    const Observable beta{CocycleSpace::Prototile, {1.0, -1.0}};
    DeviationParams params;
    params.base = region_parse("interval:1@0.3", 1);
    params.t_min = 4.0;
    params.t_max = 1048576.0;
    const DeviationReport rep =
        deviation_series(four, SequenceLaw::fixed({0}), 5, path, beta, params);
    expect_close(c, "four1d mean-zero envelope slope", rep.slope, 0.5, 0.05);
    expect_close(c, "four1d predicted exponent", rep.predicted, 0.5, 1e-6);
  }
  const TypeHFamily prod = load_family(oracles::fixture("prod2d.toml"));
  const SequenceLaw law = SequenceLaw::fixed({0});
  {
    const Observable beta{CocycleSpace::Prototile, {1.0, 1.0, -1.0, -1.0}};
    DeviationParams params;
    params.base = region_parse("box:0.5,0.5@0.3,0.2", 2);
    params.t_min = 4.0;
    params.t_max = 4096.0;
    const DeviationReport rep = deviation_series(prod, law, 5, path, beta, params);
    expect_close(c, "prod2d second-class envelope slope", rep.slope, 1.5, 0.1);
    expect_close(c, "prod2d predicted exponent", rep.predicted, 1.5, 1e-6);
  }
  {
    const CollaredSystem sys = build_collared_system(prod, law, 11);
    const auto transposed = cocycle_matrices(prod, CocycleSpace::Collared, &sys);
    const std::vector<int> word(40, 0);
    const StabilizedSubspace ss = stabilized_subspace(transposed, word);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(sys.set.count());
    dir(0) = 1.0;
    dir(4) = -1.0;
    c.expect((ss.basis.transpose() * dir).norm() < 1e-9,
             "class difference should sit in the kernel of the stabilized subspace");
    Observable beta{CocycleSpace::Collared, std::vector<double>(sys.set.count(), 0.0)};
    beta.weights[0] = 1.0;
    beta.weights[4] = -1.0;
    DeviationParams params;
    params.base = region_parse("disk:0.5@0.3,0.2", 2);
    params.t_min = 4.0;
    params.t_max = 4096.0;
    const DeviationReport rep = deviation_series(prod, law, 5, path, beta, params, &sys);
    c.expect(rep.boundary_case, "kernel observable should land in the boundary regime");
    expect_close(c, "kernel observable predicted exponent", rep.predicted, 1.0, 1e-6);
    std::ostringstream o;
    o << "kernel observable slope " << rep.slope << " should stay at or below 1.1";
    c.expect(rep.slope <= 1.1, o.str());
  }
}

void c8_packing(Check& c) {
  struct Caps {
    const char* base;
    double t_max;
    double k1, k2, kr;
  };
  const std::map<std::string, Caps> caps = {
      {"fib1d.toml", {"interval:1@0.3", 1048576.0, 6.0, 2.5, 2.0}},
      {"four1d.toml", {"interval:1@0.3", 1048576.0, 6.0, 2.5, 2.0}},
      {"degenerate1d.toml", {"interval:1@0.3", 1048576.0, 6.0, 2.5, 2.0}},
      {"prod2d.toml", {"disk:0.5@0.3,0.2", 4096.0, 80.0, 4.0, 350.0}},
  };
  for (const std::string& name : kFixtures) {
    const Caps& cap = caps.at(name);
    const TypeHFamily fam = load_family(oracles::fixture(name));
    auto h = std::make_shared<SupertileHierarchy>(fam, alternating_word(fam, 40));
    const PathSpec path{0, {}, PathPolicy::SeededRandom, 3};
    const Region base = region_parse(cap.base, fam.dim);
    const Observable ones{CocycleSpace::Prototile,
                          std::vector<double>(fam.prototile_count(), 1.0)};
    double k1 = 0.0, k2 = 0.0, kr = 0.0;
    for (double t = 4.0; t <= cap.t_max * 1.001; t *= 2.0) {
      int depth = 2;
      while (h->inv_scale(depth) < 4.0 * t && depth < 39) ++depth;
      const PatchContext ctx = make_patch(h, path, depth);
      const IntegralResult res = ergodic_integral(ctx, ones, base.scaled(t));
      const PackingBounds b = packing_bounds(res.packing, *h, base.scaled(t));
      k1 = std::max(k1, b.k1);
      k2 = std::max(k2, b.k2);
      kr = std::max(kr, b.k_residual);
    }
    std::ostringstream o;
    o << name << " witnesses k1=" << k1 << " k2=" << k2 << " kr=" << kr << " exceed caps ("
      << cap.k1 << ", " << cap.k2 << ", " << cap.kr << ")";
    c.expect(k1 <= cap.k1 && k2 <= cap.k2 && kr <= cap.kr, o.str());

    Observable mixed{CocycleSpace::Prototile, {}};
    for (int i = 0; i < fam.prototile_count(); ++i)
      mixed.weights.push_back(i % 2 ? -1.0 : 1.0);
    Rng rng(57);
    for (int trial = 0; trial < 20; ++trial) {
      const double t = 4.0 * std::exp(rng.uniform() * std::log(256.0));
      Vec off{(rng.uniform() - 0.5) * 0.2 * t, 0.0};
      if (fam.dim == 2) off.y = (rng.uniform() - 0.5) * 0.2 * t;
      const Region region = base.scaled(t).translated(off);
      int depth = 2;
      while (h->inv_scale(depth) < 6.0 * t && depth < 39) ++depth;
      const PatchContext ctx = make_patch(h, path, depth);
      const IntegralResult hier = ergodic_integral(ctx, mixed, region);
      const IntegralResult flat = ergodic_integral_flat(ctx, mixed, region);
      if (hier.anchors != flat.anchors || hier.counts != flat.counts ||
          hier.value != flat.value) {
        std::ostringstream w;
        w << name << " trial " << trial << " T=" << t
          << ": hierarchical and flat integrals disagree";
        c.expect(false, w.str());
        return;
      }
    }
  }
}

void c9_boundary(Check& c) {
  for (const char* name : {"four1d.toml", "degenerate1d.toml"}) {
    const TypeHFamily fam = load_family(oracles::fixture(name));
    const BoundaryReport rep =
        boundary_measure_decay(fam, SequenceLaw::fixed({0}), 2, 20, 20000);
    std::ostringstream o;
    o << name << " decay rate " << rep.rate << " should stay below 0.75";
    c.expect(rep.rate < 0.75, o.str());
    c.expect(rep.partial_sum > 0.0, std::string(name) + " partial sum should be positive");
    const double increment =
        rep.partial_sum > 0.0 ? rep.mass.back() / rep.partial_sum : 1.0;
    std::ostringstream w;
    w << name << " relative increment " << increment << " should be below 1e-3 at k=20";
    c.expect(increment < 1e-3, w.str());
  }
}

void c10_frequencies(Check& c) {
  const TypeHFamily fib = load_family(oracles::fixture("fib1d.toml"));
  const FrequencyReport rep = patch_frequencies(fib, SequenceLaw::fixed({0}), 3, 20);
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  c.expect(!rep.freqs.empty(), "frequency report should carry depth rows");
  const std::vector<double>& top = rep.freqs.back();
  expect_close(c, "fib1d frequency of the long tile", top[0], 1.0 / phi, 1e-3);
  expect_close(c, "fib1d frequency of the short tile", top[1], 1.0 / (phi * phi), 1e-3);
  std::ostringstream o;
  o << "cross-path discrepancy " << rep.cross_path_discrepancy << " should be below 1e-3";
  c.expect(rep.cross_path_discrepancy < 1e-3, o.str());
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void c11_determinism(Check& c) {
  namespace fs = std::filesystem;
  const fs::path tmp = fs::temp_directory_path() / "tilelab-acceptance";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const std::string cli = TILELAB_CLI_PATH;
  const std::string fx = TILELAB_FIXTURE_DIR;
  const std::string out = tmp.string();

  struct Cmd {
    const char* name;
    std::string args;
    std::vector<std::string> artifacts;
  };
  const std::vector<Cmd> cmds = {
      {"validate", "validate " + fx + "/four1d.toml --out " + out + "/val.json", {"val.json"}},
      {"expand",
       "expand " + fx + "/prod2d.toml --word 121 --depth 3 --collar --path random --seed 4 "
           "--out " + out + "/patch.jsonl",
       {"patch.jsonl"}},
      {"render",
       "render " + out + "/patch.jsonl --family " + fx + "/prod2d.toml --out " + out +
           "/patch.svg",
       {"patch.svg"}},
      {"lyapunov",
       "lyapunov " + fx + "/four1d.toml --law bernoulli:0.5,0.5 --n 100 --samples 8 --seed 5 "
           "--out " + out + "/lyap.json",
       {"lyap.json"}},
      {"deviate",
       "deviate " + fx + "/four1d.toml --law fixed:1 --beta 1,-1 --region interval:1@0.3 "
           "--tmin 4 --tmax 4096 --path random --seed 5 --subseq --out " + out + "/dev.json",
       {"dev.json", "dev.csv"}},
      {"freqs", "freqs " + fx + "/fib1d.toml --depth 14 --seed 3 --out " + out + "/freqs.json",
       {"freqs.json"}},
      {"boundary",
       "boundary " + fx + "/four1d.toml --kmax 10 --samples 4000 --seed 2 --out " + out +
           "/bnd.json",
       {"bnd.json"}},
      {"product",
       "product " + fx + "/four1d.toml " + fx + "/four1d.toml --name fxf --out " + out +
           "/fxf.toml",
       {"fxf.toml"}},
  };
  for (const Cmd& cmd : cmds) {
    std::map<std::string, std::string> first;
    for (int run = 0; run < 2; ++run) {
      const std::string threads = run == 0 ? "1" : "4";
      const std::string capture = out + "/" + cmd.name + ".stdout." + threads;
      const std::string shell = "env SOURCE_DATE_EPOCH=1700000000 TILELAB_THREADS=" + threads +
                                " " + cli + " " + cmd.args + " > " + capture + " 2>&1";
      if (std::system(shell.c_str()) != 0) {
        c.expect(false, std::string(cmd.name) + " exited nonzero: " + read_bytes(capture));
        return;
      }
      std::map<std::string, std::string> got;
      got["stdout"] = read_bytes(capture);
      for (const std::string& a : cmd.artifacts) got[a] = read_bytes(tmp / a);
      if (run == 0) {
        first = std::move(got);
        c.expect(!first.at(cmd.artifacts.front()).empty(),
                 std::string(cmd.name) + " wrote an empty " + cmd.artifacts.front());
        continue;
      }
      for (const auto& [key, bytes] : got)
        c.expect(bytes == first.at(key),
                 std::string(cmd.name) + " " + key + " differs between 1 and 4 threads");
    }
  }
}

}  // namespace

int main() {
  criterion(1, "structural validation", 1.0, c1_validation);
  criterion(2, "leaf counting", 10.0, c2_counting);
  criterion(3, "renormalization conjugacy", 0.0, c3_conjugacy);
  criterion(4, "Lyapunov spectra", 30.0, c4_lyapunov);
  criterion(5, "leading exponent consistency", 0.0, c5_lambda1);
  criterion(6, "cocycle geometry identity", 0.0, c6_cocycle_geometry);
  criterion(7, "deviation exponents", 300.0, c7_deviation);
  criterion(8, "packing bounds", 0.0, c8_packing);
  criterion(9, "boundary mass decay", 0.0, c9_boundary);
  criterion(10, "patch frequencies", 0.0, c10_frequencies);
  criterion(11, "deterministic artifacts", 0.0, c11_determinism);
  if (g_failed) {
    std::printf("%d of 11 criteria failed\n", g_failed);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
