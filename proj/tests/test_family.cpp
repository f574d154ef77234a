#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tilelab/family.hpp"

using namespace tilelab;

TEST_CASE("fib1d loads with evaluated constants") {
  const TypeHFamily fam = load_family(oracles::fixture("fib1d.toml"));
  const double phi = (1 + std::sqrt(5.0)) / 2;
  REQUIRE(fam.prototile_count() == 2);
  REQUIRE(fam.rule_count() == 1);
  CHECK(fam.dim == 1);
  CHECK(fam.prototiles[0].lo == doctest::Approx(-phi / 2).epsilon(1e-15));
  CHECK(fam.prototiles[0].hi == doctest::Approx(phi / 2).epsilon(1e-15));
  CHECK(fam.prototiles[1].lo == doctest::Approx(-0.5));
  CHECK(fam.rules[0].theta == doctest::Approx(1 / phi).epsilon(1e-15));
  CHECK(fam.constants.at("phi") == doctest::Approx(phi));
}

TEST_CASE("transition matrices match the rules") {
  const TypeHFamily fib = load_family(oracles::fixture("fib1d.toml"));
  const IntMatrix mf = transition_matrix(fib, 0);
  CHECK(mf == IntMatrix{{1, 1}, {1, 0}});

  const TypeHFamily four = load_family(oracles::fixture("four1d.toml"));
  REQUIRE(four.rule_count() == 2);
  CHECK(transition_matrix(four, 0) == IntMatrix{{3, 1}, {1, 3}});
  CHECK(transition_matrix(four, 1) == IntMatrix{{1, 3}, {3, 1}});

  const TypeHFamily deg = load_family(oracles::fixture("degenerate1d.toml"));
  CHECK(transition_matrix(deg, 0) == IntMatrix{{2}});
}

TEST_CASE("shipped fixtures validate") {
  for (const char* name : {"fib1d.toml", "four1d.toml", "degenerate1d.toml", "prod2d.toml"}) {
    const TypeHFamily fam = load_family(oracles::fixture(name));
    const ValidationReport report = validate_type_h(fam);
    INFO(name);
    for (const CheckResult& c : report.checks) {
      INFO(c.name << ": " << c.witness);
      CHECK(c.passed);
    }
    CHECK(report.ok());
  }
}

TEST_CASE("broken fixtures fail their named check") {
  {
    const TypeHFamily fam = load_family(oracles::fixture("broken_theta.toml"));
    const ValidationReport report = validate_type_h(fam);
    REQUIRE(report.find("uniform-scaling") != nullptr);
    CHECK(!report.find("uniform-scaling")->passed);
    CHECK(report.find("contracting")->passed);
  }
  {
    const TypeHFamily fam = load_family(oracles::fixture("broken_origin.toml"));
    const ValidationReport report = validate_type_h(fam);
    REQUIRE(report.find("shared-attractor-interior-origin") != nullptr);
    CHECK(!report.find("shared-attractor-interior-origin")->passed);
    CHECK(report.find("compatibility")->passed);
    CHECK(report.find("uniform-scaling")->passed);
  }
  {
    const TypeHFamily fam = load_family(oracles::fixture("broken_overlap.toml"));
    const ValidationReport report = validate_type_h(fam);
    const CheckResult* compat = report.find("compatibility");
    REQUIRE(compat != nullptr);
    CHECK(!compat->passed);
    CHECK(compat->witness.find("volume") != std::string::npos);
    // The misplaced square still covers the right total volume, so the
    // attractor check alone cannot catch it.
    CHECK(report.find("shared-attractor-interior-origin")->passed);
  }
}

TEST_CASE("serialize then reload is the identity") {
  for (const char* name : {"fib1d.toml", "four1d.toml", "degenerate1d.toml", "prod2d.toml"}) {
    const TypeHFamily fam = load_family(oracles::fixture(name));
    const TypeHFamily again = parse_family(serialize_family(fam));
    INFO(name);
    CHECK(family_equal(fam, again));
  }
}

TEST_CASE("product family tensors branches and matrices") {
  const TypeHFamily four = load_family(oracles::fixture("four1d.toml"));
  const TypeHFamily prod = product_family_2d(four, four);
  REQUIRE(prod.prototile_count() == 4);
  REQUIRE(prod.rule_count() == 2);
  CHECK(prod.dim == 2);
  for (int r = 0; r < 2; ++r) CHECK(prod.rules[r].branches.size() == 64);

  // Tensor identity on transition matrices.
  const IntMatrix mf = transition_matrix(four, 0);
  const IntMatrix mp = transition_matrix(prod, 0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) CHECK(mp[i * 2 + k][j * 2 + l] == mf[i][j] * mf[k][l]);
  std::int64_t row_sum = 0;
  for (const std::int64_t v : mp[0]) row_sum += v;
  CHECK(row_sum == 16);

  const ValidationReport report = validate_type_h(prod);
  for (const CheckResult& c : report.checks) {
    INFO(c.name << ": " << c.witness);
    CHECK(c.passed);
  }

  const TypeHFamily again = parse_family(serialize_family(prod));
  CHECK(family_equal(prod, again));
}

TEST_CASE("loader rejects malformed documents") {
  CHECK_THROWS_AS(parse_family("garbage = ["), LoadError);
  CHECK_THROWS_AS(parse_family("name = \"x\"\n"), LoadError);  // no prototiles
  // Unknown prototile reference.
  CHECK_THROWS_AS(parse_family(R"(name = "x"
[[prototile]]
id = "a"
dim = 1
interval = [-0.5, 0.5]
[[rule]]
id = "r"
theta = 0.5
[[rule.branch]]
source = "zz"
target = "a"
offset = [0.0]
)"),
                  LoadError);
  // Unresolvable constant.
  CHECK_THROWS_AS(parse_family(R"(name = "x"
[constants]
u = "v"
v = "u"
[[prototile]]
id = "a"
dim = 1
interval = [-0.5, 0.5]
[[rule]]
id = "r"
theta = 0.5
[[rule.branch]]
source = "a"
target = "a"
offset = [0.0]
)"),
                  LoadError);
  // Offset arity mismatch.
  CHECK_THROWS_AS(parse_family(R"(name = "x"
[[prototile]]
id = "a"
dim = 1
interval = [-0.5, 0.5]
[[rule]]
id = "r"
theta = 0.5
[[rule.branch]]
source = "a"
target = "a"
offset = [0.0, 1.0]
)"),
                  LoadError);
}
