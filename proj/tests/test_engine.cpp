#include <doctest.h>

#include <cmath>
#include <vector>

#include "rumorlab/engine.hpp"
#include "rumorlab/error.hpp"
#include "rumorlab/oracle.hpp"

using namespace rumorlab;

namespace {

using VS = VertexState;

Graph star(int leaves) {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> types(leaves + 1, 1);
  types[0] = 0;
  for (int v = 1; v <= leaves; ++v) edges.emplace_back(0, v);
  return Graph(validate_blueprint({{0, leaves}, {1, 0}}), types, edges);
}

Graph single_edge() { return Graph(validate_blueprint({{1}}), {0, 0}, {{0, 1}}); }

std::vector<VS> one_spreader(int n, int at = 0) {
  std::vector<VS> s(n, VS::kIgnorant);
  s[at] = VS::kSpreader;
  return s;
}

SimConfig explicit_config(std::vector<VS> init, const StiflingLaw& law, double t_max, double dt) {
  SimConfig cfg;
  cfg.lambda = 1.0;
  cfg.law = law;
  cfg.t_max = t_max;
  cfg.grid_dt = dt;
  cfg.initial = std::move(init);
  return cfg;
}

// Largest |replica mean - oracle| / SE over grid, type and state.
double max_z(const Graph& g, const SimConfig& cfg, int runs, std::uint64_t seed) {
  const auto set = run_replicas(g, cfg, runs, seed, 4);
  const auto& init = std::get<std::vector<VS>>(cfg.initial);
  const auto oracle = exact_oracle(g, cfg.lambda, cfg.law, init, set.runs[0].times, cfg.yy_rule);
  double worst = 0.0;
  for (std::size_t i = 0; i < set.mean.size(); ++i) {
    const double se = std::sqrt(set.variance[i] / runs);
    const double diff = std::abs(set.mean[i] - oracle.expected[i]);
    if (se == 0.0) {
      // Every replica agreed; the oracle may still put a rare event there.
      CHECK(diff * runs < 3.0);
      continue;
    }
    worst = std::max(worst, diff / se);
  }
  return worst;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("initial state") {
  SUBCASE("no spreaders") {
    const auto g = build_family(family::Torus2D{5});
    SimConfig cfg;
    cfg.initial = TypeProportions::uniform(1, 0.0);
    Rng rng(1);
    SimState s(g, cfg, rng);
    CHECK(s.active_edges() == 0);
    CHECK(s.pending_stiflings() == 0);
    CHECK_FALSE(step(s, rng).has_value());
  }
  SUBCASE("all spreaders under Never") {
    const auto g = build_family(family::Torus2D{5});
    SimConfig cfg;
    cfg.initial = TypeProportions::uniform(1, 1.0);
    Rng rng(1);
    SimState s(g, cfg, rng);
    CHECK(s.pending_stiflings() == 0);
    CHECK(s.category_size(EdgeCategory::kYY) == g.num_edges());
  }
  SUBCASE("one percent of the 50-torus") {
    const auto g = build_family(family::Torus2D{50});
    SimConfig cfg;
    cfg.law = law::Weibull{2.0, 5.0};
    cfg.initial = TypeProportions::uniform(1, 0.01);
    Rng rng(4);
    SimState s(g, cfg, rng);
    CHECK(s.counts()[0][1] == 25);
    CHECK(s.counts()[0][0] == 2475);
    CHECK(s.pending_stiflings() == 25);
    s.check_invariants();
  }
  SUBCASE("rounding overflow") {
    const auto g = build_family(family::Cycle{5});
    SimConfig cfg;
    cfg.initial = TypeProportions{{0.0}, {0.6}, {0.4}};
    Rng rng(1);
    // round(3) + round(2) fits; 0.7 + 0.3 rounds to 4 + 2 > 5.
    CHECK_NOTHROW(SimState(g, cfg, rng));
    cfg.initial = TypeProportions{{0.0}, {0.7}, {0.3}};
    CHECK_THROWS_AS(SimState(g, cfg, rng), Error);
  }
  SUBCASE("invalid configs") {
    const auto g = build_family(family::Cycle{5});
    SimConfig cfg;
    cfg.initial = TypeProportions::uniform(1, 0.2);
    cfg.lambda = 0.0;
    CHECK_THROWS_AS(validate_config(g, cfg), Error);
    cfg.lambda = 1.0;
    cfg.grid_dt = 0.3;
    cfg.t_max = 1.0;
    CHECK_THROWS_AS(validate_config(g, cfg), Error);
    cfg.grid_dt = 0.1;
    cfg.initial = TypeProportions{{0.5}, {0.2}, {0.2}};
    CHECK_THROWS_AS(validate_config(g, cfg), Error);
    cfg.initial = std::vector<VS>(4, VS::kIgnorant);
    CHECK_THROWS_AS(validate_config(g, cfg), Error);
  }
}

TEST_CASE("trajectory recording") {
  SUBCASE("t_max = 0 records the initial counts") {
    const auto g = build_family(family::Cycle{6});
    auto cfg = explicit_config(one_spreader(6), law::Never{}, 0.0, 0.1);
    const auto tr = run(g, cfg);
    REQUIRE(tr.times.size() == 1);
    CHECK(tr.at(0, 0, 0) == 5);
    CHECK(tr.at(0, 0, 1) == 1);
  }
  SUBCASE("Y = 0 stays constant") {
    const auto g = build_family(family::Cycle{6});
    std::vector<VS> init(6, VS::kIgnorant);
    init[2] = VS::kStifler;
    const auto tr = run(g, explicit_config(init, law::Exponential{1.0}, 3.0, 0.5));
    for (std::size_t m = 0; m < tr.times.size(); ++m) {
      CHECK(tr.at(m, 0, 0) == 5);
      CHECK(tr.at(m, 0, 2) == 1);
    }
    CHECK(tr.events == 0);
  }
  SUBCASE("Immediate law keeps Y at zero after time 0") {
    const auto g = build_family(family::Torus2D{10});
    SimConfig cfg;
    cfg.law = law::Immediate{};
    cfg.t_max = 5.0;
    cfg.initial = TypeProportions::uniform(1, 0.05);
    const auto tr = run(g, cfg);
    CHECK(tr.at(0, 0, 1) == 5);
    for (std::size_t m = 1; m < tr.times.size(); ++m) CHECK(tr.at(m, 0, 1) == 0);
  }
  SUBCASE("triangle of spreaders under Never ends all stiflers") {
    const auto g = build_family(family::Cycle{3});
    auto cfg = explicit_config(std::vector<VS>(3, VS::kSpreader), law::Never{}, 50.0, 1.0);
    const auto tr = run(g, cfg);
    const auto last = tr.times.size() - 1;
    CHECK(tr.at(last, 0, 2) == 3);
    CHECK(tr.events <= 2);
  }
  SUBCASE("conservation, monotonicity and counter identities") {
    const auto g = build_family(family::Bipartite24{30});
    SimConfig cfg;
    cfg.lambda = 0.7;
    cfg.law = law::Weibull{2.0, 3.0};
    cfg.t_max = 15.0;
    cfg.initial = TypeProportions{{0.9, 0.85}, {0.1, 0.1}, {0.0, 0.05}};
    cfg.debug_checks = true;
    cfg.seed = 12;
    const auto tr = run(g, cfg);
    for (int k = 0; k < 2; ++k) {
      for (std::size_t m = 0; m < tr.times.size(); ++m) {
        CHECK(tr.at(m, k, 0) + tr.at(m, k, 1) + tr.at(m, k, 2) == tr.type_sizes[k]);
        if (m > 0) {
          CHECK(tr.at(m, k, 0) <= tr.at(m - 1, k, 0));
          CHECK(tr.at(m, k, 2) >= tr.at(m - 1, k, 2));
        }
      }
      // With no event exactly at t_max, the last grid value is the final state.
      const auto last = tr.times.size() - 1;
      CHECK(tr.at(0, k, 0) - tr.at(last, k, 0) == tr.conversions[k]);
      CHECK(tr.at(last, k, 1) ==
            tr.at(0, k, 1) + tr.conversions[k] - tr.contact_stiflings[k] - tr.spontaneous_stiflings[k]);
    }
  }
  SUBCASE("same seed, same trajectory") {
    const auto g = build_family(family::Torus2D{20});
    SimConfig cfg;
    cfg.lambda = 0.5;
    cfg.law = law::Weibull{2.0, 5.0};
    cfg.initial = TypeProportions::uniform(1, 0.01);
    cfg.seed = 99;
    const auto a = run(g, cfg);
    const auto b = run(g, cfg);
    CHECK(a.counts == b.counts);
    CHECK(a.events == b.events);
    cfg.seed = 100;
    CHECK(run(g, cfg).counts != a.counts);
  }
}

TEST_CASE("replica sweeps") {
  const auto g = build_family(family::Torus2D{8});
  SimConfig cfg;
  cfg.law = law::Exponential{1.0};
  cfg.t_max = 4.0;
  cfg.initial = TypeProportions::uniform(1, 0.1);
  SUBCASE("one run has zero variance") {
    const auto set = run_replicas(g, cfg, 1, 3);
    for (std::size_t i = 0; i < set.mean.size(); ++i) {
      CHECK(set.mean[i] == static_cast<double>(set.runs[0].counts[i]));
      CHECK(set.variance[i] == 0.0);
    }
  }
  SUBCASE("forced identical seeds have zero variance") {
    ReplicaSet set;
    cfg.seed = 17;
    for (int r = 0; r < 5; ++r) set.runs.push_back(run(g, cfg));
    summarize(set);
    for (double v : set.variance) CHECK(v == 0.0);
  }
  SUBCASE("results do not depend on the job count") {
    const auto a = run_replicas(g, cfg, 12, 5, 1);
    const auto b = run_replicas(g, cfg, 12, 5, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.variance == b.variance);
    const auto c = run_replicas(g, cfg, 12, 5, 16);
    CHECK(a.mean == c.mean);
  }
  SUBCASE("replica seeds come from derive_seed") {
    const auto set = run_replicas(g, cfg, 3, 5);
    auto one = cfg;
    one.seed = derive_seed(5, 2);
    CHECK(run(g, one).counts == set.runs[2].counts);
  }
  CHECK_THROWS_AS(run_replicas(g, cfg, 0, 1), Error);
}

TEST_CASE("single X-Y edge converts at rate lambda") {
  const auto g = single_edge();
  auto cfg = explicit_config({VS::kSpreader, VS::kIgnorant}, law::Never{}, 2.0, 0.5);
  const int runs = 100000;
  const auto set = run_replicas(g, cfg, runs, 2024, 4);
  for (std::size_t m = 0; m < set.runs[0].times.size(); ++m) {
    const double t = set.runs[0].times[m];
    const double p = 1.0 - std::exp(-t);
    // Mean ignorant count is the probability of no conversion yet.
    const double emp = 1.0 - set.mean[m * 3 + 0];
    CHECK(std::abs(emp - p) <= 3.0 * std::sqrt(p * (1 - p) / runs) + 1e-12);
  }
}

TEST_CASE("spreader pair rules") {
  SUBCASE("both stifle vs initiator only on two spreaders") {
    const auto g = single_edge();
    auto cfg = explicit_config({VS::kSpreader, VS::kSpreader}, law::Never{}, 10.0, 1.0);
    for (auto rule : {YYRule::kBothStifle, YYRule::kInitiatorOnly}) {
      cfg.yy_rule = rule;
      Rng rng(3);
      SimState s(g, cfg, rng);
      const auto ev = step(s, rng);
      REQUIRE(ev.has_value());
      CHECK(ev->category == EdgeCategory::kYY);
      CHECK(s.counts()[0][2] == (rule == YYRule::kBothStifle ? 2 : 1));
      CHECK(s.contact_stiflings()[0] == s.counts()[0][2]);
    }
  }
  SUBCASE("matched seeds agree when no spreader pair can form") {
    // A spreading centre whose converts stifle on creation never meets
    // another spreader, so the two rules see identical event streams.
    const auto g = star(6);
    auto cfg = explicit_config(one_spreader(7, 0), law::Immediate{}, 6.0, 0.25);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      cfg.seed = seed;
      cfg.yy_rule = YYRule::kBothStifle;
      const auto a = run(g, cfg);
      cfg.yy_rule = YYRule::kInitiatorOnly;
      const auto b = run(g, cfg);
      CHECK(a.counts == b.counts);
    }
  }
}

TEST_CASE("exact oracle") {
  SUBCASE("all stiflers are constant") {
    const auto g = build_family(family::Cycle{4});
    const std::vector<VS> init(4, VS::kStifler);
    const std::vector<double> times{0.0, 1.0, 5.0};
    const auto o = exact_oracle(g, 1.0, law::Exponential{1.0}, init, times);
    for (std::size_t m = 0; m < 3; ++m) CHECK(o.at(m, 0, 2) == doctest::Approx(4.0));
  }
  SUBCASE("a lone spreader next to a stifler") {
    // The spreader leaves at rate lambda + mu.
    const auto g = single_edge();
    const std::vector<VS> init{VS::kSpreader, VS::kStifler};
    const std::vector<double> times{0.0, 0.5, 1.0, 3.0};
    const auto o = exact_oracle(g, 0.5, law::Exponential{1.0}, init, times);
    for (std::size_t m = 0; m < times.size(); ++m) CHECK(o.at(m, 0, 1) == doctest::Approx(std::exp(-1.5 * times[m])));
  }
  SUBCASE("X-Y edge with stifling") {
    // E[#ignorant] = P(contact before the spreader stifles) complement:
    // the ignorant survives with prob mu/(lambda+mu) + lambda/(lambda+mu) e^{-(lambda+mu)t}.
    const auto g = single_edge();
    const std::vector<VS> init{VS::kSpreader, VS::kIgnorant};
    const std::vector<double> times{0.7, 2.0};
    const double lam = 1.0, mu = 2.0;
    const auto o = exact_oracle(g, lam, law::Exponential{mu}, init, times);
    for (std::size_t m = 0; m < times.size(); ++m)
      CHECK(o.at(m, 0, 0) ==
            doctest::Approx(mu / (lam + mu) + lam / (lam + mu) * std::exp(-(lam + mu) * times[m])));
  }
  SUBCASE("errors") {
    const auto g = build_family(family::Cycle{11});
    const std::vector<double> times{1.0};
    CHECK_THROWS_AS(exact_oracle(g, 1.0, law::Exponential{1.0}, one_spreader(11), times), Error);
    const auto c4 = build_family(family::Cycle{4});
    try {
      exact_oracle(c4, 1.0, law::Weibull{2.0, 1.0}, one_spreader(4), times);
      FAIL("expected NonExponentialLaw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNonExponentialLaw);
    }
    const std::vector<double> bad{1.0, 0.5};
    CHECK_THROWS_AS(exact_oracle(c4, 1.0, law::Exponential{1.0}, one_spreader(4), bad), Error);
  }
}

TEST_CASE("simulator matches the oracle on small graphs") {
  const int runs = 20000;
  SUBCASE("cycle of four") {
    auto cfg = explicit_config(one_spreader(4), law::Exponential{1.0}, 4.0, 0.8);
    CHECK(max_z(build_family(family::Cycle{4}), cfg, runs, 31) < 4.5);
  }
  SUBCASE("star with five leaves, both rules") {
    auto cfg = explicit_config(one_spreader(6, 2), law::Exponential{0.7}, 4.0, 0.8);
    cfg.lambda = 1.3;
    CHECK(max_z(star(5), cfg, runs, 32) < 4.5);
    cfg.yy_rule = YYRule::kInitiatorOnly;
    CHECK(max_z(star(5), cfg, runs, 33) < 4.5);
  }
  SUBCASE("two-type bipartite graph") {
    auto cfg = explicit_config(one_spreader(6, 0), law::Exponential{1.0}, 4.0, 0.8);
    CHECK(max_z(build_family(family::Bipartite24{2}), cfg, runs, 34) < 4.5);
  }
}

}  // TEST_SUITE
