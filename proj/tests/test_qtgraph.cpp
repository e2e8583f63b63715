#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rumorlab/error.hpp"
#include "rumorlab/qtgraph.hpp"

using namespace rumorlab;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

std::vector<std::int64_t> table(std::size_t n, auto f) {
  std::vector<std::int64_t> v(n + 1);
  for (std::size_t r = 0; r <= n; ++r) v[r] = f(static_cast<std::int64_t>(r));
  return v;
}

}  // namespace

TEST_SUITE("qtgraph") {

TEST_CASE("rational arithmetic stays reduced") {
  CHECK(Rational::make(4, 6) == Rational{2, 3});
  CHECK(Rational::make(1, 3) + Rational::make(1, 6) == Rational{1, 2});
  CHECK(Rational::make(2, 3) * Rational::make(3, 4) == Rational{1, 2});
  CHECK(Rational::make(1, 2) / Rational::make(1, 4) == Rational{2, 1});
}

TEST_CASE("blueprint proportions") {
  SUBCASE("bipartite 2-4") {
    const auto bp = validate_blueprint({{0, 2}, {4, 0}});
    CHECK(bp.proportions_exact()[0] == Rational{2, 3});
    CHECK(bp.proportions_exact()[1] == Rational{1, 3});
    CHECK(bp.coupling(0, 1) == doctest::Approx(6.0));
    CHECK(bp.coupling(1, 0) == doctest::Approx(6.0));
  }
  SUBCASE("decorated grid") {
    const auto bp = validate_blueprint({{0, 2, 2, 1}, {2, 0, 0, 2}, {2, 0, 2, 2}, {1, 2, 2, 0}});
    for (const auto& p : bp.proportions_exact()) CHECK(p == Rational{1, 4});
    CHECK(bp.degree(0) == 5);
    CHECK(bp.degree(1) == 4);
    CHECK(bp.degree(2) == 6);
    CHECK(bp.degree(3) == 5);
  }
  SUBCASE("single type") {
    const auto bp = validate_blueprint({{2}});
    CHECK(bp.proportions_exact()[0] == Rational{1, 1});
  }
  SUBCASE("five orbits") {
    const auto bp = validate_blueprint(
        {{0, 24, 2, 0, 3}, {24, 0, 2, 0, 1}, {2, 2, 0, 4, 0}, {0, 0, 4, 0, 0}, {3, 1, 0, 0, 0}});
    for (const auto& p : bp.proportions_exact()) CHECK(p == Rational{1, 5});
  }
  SUBCASE("non-symmetric three types") {
    // p0 n0(1) = p1 n1(0): p0 = 2 p1; p1 n1(2) = p2 n2(1): p2 = p1 / 3.
    const auto bp = validate_blueprint({{0, 1, 0}, {2, 0, 1}, {0, 3, 0}});
    CHECK(bp.proportions_exact()[0] == Rational{3, 5});
    CHECK(bp.proportions_exact()[1] == Rational{3, 10});
    CHECK(bp.proportions_exact()[2] == Rational{1, 10});
  }
}

TEST_CASE("blueprint errors") {
  CHECK(code_of([] { validate_blueprint({{1, 1}, {0, 1}}); }) == ErrorCode::kInconsistentCounts);
  CHECK(code_of([] { validate_blueprint({{2, 0}, {0, 2}}); }) == ErrorCode::kDisconnectedTypes);
  CHECK(code_of([] { validate_blueprint({{0, 0}, {0, 0}}); }) == ErrorCode::kZeroDegreeType);
  CHECK(code_of([] { validate_blueprint({}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { validate_blueprint({{1, 2}}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { validate_blueprint({{-1}}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { validate_blueprint({{0, 1}, {0, 0}}); }) == ErrorCode::kZeroDegreeType);
  // Cycle product 1*1*1 / (2*1*1) != 1 around the triangle of types.
  CHECK(code_of([] { validate_blueprint({{0, 1, 1}, {1, 0, 1}, {2, 1, 0}}); }) ==
        ErrorCode::kInconsistentCounts);
}

TEST_CASE("built-in families") {
  SUBCASE("bipartite24(8)") {
    const auto g = build_family(family::Bipartite24{8});
    CHECK(g.num_vertices() == 24);
    CHECK(g.type_sizes() == std::vector<int>{16, 8});
    for (int v = 0; v < g.num_vertices(); ++v) CHECK(g.degree(v) == (g.type_of(v) == 0 ? 2 : 4));
  }
  SUBCASE("cycle(7)") {
    const auto g = build_family(family::Cycle{7});
    CHECK(g.num_vertices() == 7);
    CHECK(g.num_edges() == 7);
    CHECK(g.blueprint().n_types() == 1);
  }
  SUBCASE("decorated grid(8,6)") {
    const auto g = build_family(family::DecoratedGrid{8, 6});
    CHECK(g.num_vertices() == 48);
    CHECK(g.type_sizes() == std::vector<int>{12, 12, 12, 12});
  }
  SUBCASE("torus(50)") {
    const auto g = build_family(family::Torus2D{50});
    const auto rep = verify_realization(g);
    CHECK(rep.pass);
    CHECK(rep.connected);
    CHECK(rep.empirical_proportions == std::vector<double>{1.0});
    CHECK(g.num_edges() == 5000);
  }
  SUBCASE("every family verifies at two sizes") {
    for (const char* name : {"cycle:5", "cycle:12", "bipartite24:3", "bipartite24:13", "grid:6:4", "grid:8:6",
                             "torus:3", "torus:20", "comb:3", "comb:10", "strip3:3", "strip3:9"}) {
      CAPTURE(name);
      const auto g = build_family(parse_family(name));
      const auto rep = verify_realization(g);
      CHECK(rep.pass);
      CHECK(rep.connected);
      CHECK(rep.symmetric);
      for (int i = 0; i < g.blueprint().n_types(); ++i)
        CHECK(rep.empirical_proportions[i] == doctest::Approx(g.blueprint().proportion(i)));
      CHECK(family_name(parse_family(name)) == name);
    }
  }
  SUBCASE("size errors") {
    CHECK(code_of([] { build_family(family::Cycle{2}); }) == ErrorCode::kSizeTooSmall);
    CHECK(code_of([] { build_family(family::DecoratedGrid{5, 6}); }) == ErrorCode::kOddGridDimension);
    CHECK(code_of([] { parse_family("hexagon:3"); }) == ErrorCode::kParseError);
  }
}

TEST_CASE("verify_realization flags a rewired edge") {
  // Cycle 0-1-2-3-4-5-0 with edge 0-1 replaced by 0-2: vertex 0 keeps degree
  // 2 but vertex 1 drops to degree 1.
  const auto bp = validate_blueprint({{2}});
  const std::vector<std::pair<int, int>> edges = {{0, 2}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}};
  const Graph g(bp, std::vector<int>(6, 0), edges);
  const auto rep = verify_realization(g);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.offending_vertex.has_value());
  CHECK(*rep.offending_vertex == 1);
}

TEST_CASE("configuration model") {
  const auto bp = validate_blueprint({{0, 2}, {4, 0}});
  SUBCASE("realizes the blueprint") {
    const auto res = build_configuration_model(bp, 24, 11);
    CHECK(res.graph.num_vertices() == 24);
    CHECK(verify_realization(res.graph).pass);
  }
  SUBCASE("same seed gives the same graph") {
    const auto a = build_configuration_model(bp, 300, 5);
    const auto b = build_configuration_model(bp, 300, 5);
    CHECK(a.graph.edges() == b.graph.edges());
    CHECK(a.graph.types() == b.graph.types());
  }
  SUBCASE("2-regular on five vertices") {
    const auto res = build_configuration_model(validate_blueprint({{2}}), 5, 3);
    CHECK(verify_realization(res.graph).pass);
    CHECK(res.graph.num_edges() == 5);
  }
  SUBCASE("five orbits") {
    const auto five = validate_blueprint(
        {{0, 24, 2, 0, 3}, {24, 0, 2, 0, 1}, {2, 2, 0, 4, 0}, {0, 0, 4, 0, 0}, {3, 1, 0, 0, 0}});
    const auto res = build_configuration_model(five, 500, 1);
    CHECK(verify_realization(res.graph).pass);
  }
  SUBCASE("infeasible sizes") {
    CHECK_FALSE(feasible_type_sizes(bp, 7).has_value());
    CHECK(code_of([&] { build_configuration_model(bp, 7, 1); }) == ErrorCode::kInfeasibleSize);
    // Odd stub count for a 3-regular single type.
    CHECK(code_of([] { build_configuration_model(validate_blueprint({{3}}), 5, 1); }) ==
          ErrorCode::kInfeasibleSize);
  }
  SUBCASE("impossible simple graph exhausts the budget") {
    // K5 is the only simple 4-regular graph on five vertices; one restart
    // with a single partner draw per stub almost never finds it.
    ConfigModelOptions opts;
    opts.max_restarts = 1;
    opts.tries_per_stub = 1;
    CHECK(code_of([&] { build_configuration_model(validate_blueprint({{4}}), 5, 1, opts); }) ==
          ErrorCode::kMatchingFailed);
    CHECK(code_of([] { build_configuration_model(validate_blueprint({{4}}), 4, 1); }) ==
          ErrorCode::kInfeasibleSize);
  }
}

TEST_CASE("growth margin g") {
  SUBCASE("constant increments f(r) = r + 1") {
    const GrowthTable t(table(200, [](std::int64_t r) { return r + 1; }));
    CHECK(tail_growth_rate(t, 50) == Rational{1, 50});
    CHECK(boundary_margin_g(t, 100) == 7);
  }
  SUBCASE("n = 2 gives 1") {
    const GrowthTable t(table(10, [](std::int64_t r) { return (2 * r + 1) * (2 * r + 1); }));
    CHECK(boundary_margin_g(t, 2) == 1);
    CHECK(boundary_margin_g(t, 3) == 1);
  }
  SUBCASE("Z2 balls: bounds and divergence") {
    const GrowthTable t(table(10000, [](std::int64_t r) { return (2 * r + 1) * (2 * r + 1); }));
    std::int64_t prev = 0;
    for (std::int64_t n = 2; n <= 10000; n += 37) {
      const auto g = boundary_margin_g(t, n);
      CHECK(g >= 1);
      CHECK(g <= n / 2);
      CHECK(g >= prev);
      prev = g;
      const double m = tail_growth_rate(t, n / 2).value();
      const double loss = static_cast<double>(t.at(n) - t.at(n - g)) / static_cast<double>(t.at(n));
      CHECK(loss <= std::sqrt(m) + 1e-12);
    }
    CHECK(boundary_margin_g(t, 10000) > boundary_margin_g(t, 100));
  }
  SUBCASE("errors") {
    const GrowthTable t(table(10, [](std::int64_t r) { return r + 1; }));
    CHECK(code_of([&] { boundary_margin_g(t, 11); }) == ErrorCode::kTableTooShort);
    CHECK(code_of([&] { boundary_margin_g(t, 1); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([] { GrowthTable({3, 2}); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([] { GrowthTable({0, 2}); }) == ErrorCode::kInvalidArgument);
  }
}

}  // TEST_SUITE
