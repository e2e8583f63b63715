#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "rumorlab/config.hpp"
#include "rumorlab/error.hpp"
#include "rumorlab/io.hpp"

using namespace rumorlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rumorlab_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Message of the SchemaError thrown by fn, or "" when nothing is thrown.
std::string schema_message(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchemaError);
    return e.what();
  }
  return "";
}

bool mentions(const std::string& msg, const std::string& part) { return msg.find(part) != std::string::npos; }

}  // namespace

TEST_SUITE("io") {

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5}) CHECK(std::stod(io::format_number(v)) == v);
  CHECK(io::format_number(2.0) == "2");
}

TEST_CASE("blueprint json") {
  const auto bp = validate_blueprint({{0, 2}, {4, 0}});
  const json j = io::blueprint_to_json(bp);
  CHECK(j["n_types"] == 2);
  CHECK(io::blueprint_from_json(j).counts() == bp.counts());
  CHECK(mentions(schema_message([] { io::blueprint_from_json(json{{"n_types", 2}, {"counts", {{0, 2}}}}); }),
                 "/n_types"));
  CHECK(mentions(schema_message([] { io::blueprint_from_json(json{{"n_types", 1}, {"counts", {{"x"}}}}, "/graph/blueprint"); }),
                 "/graph/blueprint/counts/0/0"));
  CHECK_THROWS_AS(io::blueprint_from_json(json{{"n_types", 2}, {"counts", {{0, 1}, {0, 0}}}}), Error);
}

TEST_CASE("graph files round-trip") {
  const auto dir = scratch("graph");
  const auto g = build_family(family::DecoratedGrid{6, 4});
  io::write_graph(g, dir / "g.csv", dir / "g.json");
  const auto back = io::read_graph(dir / "g.csv", dir / "g.json");
  CHECK(back.edges() == g.edges());
  CHECK(back.types() == g.types());
  CHECK(back.blueprint().counts() == g.blueprint().counts());
  CHECK(io::read_text(dir / "g.csv").rfind("u,v\n", 0) == 0);

  // Without a blueprint in the sidecar it is read off the graph.
  json side = io::read_json(dir / "g.json");
  side.erase("blueprint");
  io::write_json(dir / "bare.json", side);
  CHECK(io::read_graph(dir / "g.csv", dir / "bare.json").blueprint().counts() == g.blueprint().counts());

  io::write_text(dir / "broken.csv", "u,v\n0;1\n");
  CHECK_THROWS_AS(io::read_graph(dir / "broken.csv", dir / "g.json"), Error);
  CHECK_THROWS_AS(io::read_text(dir / "missing.csv"), Error);
  io::write_text(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(io::read_json(dir / "bad.json"), Error);
}

TEST_CASE("csv layouts") {
  const auto g = build_family(family::Cycle{4});
  SimConfig cfg;
  cfg.t_max = 0.2;
  cfg.grid_dt = 0.1;
  cfg.initial = TypeProportions::uniform(1, 0.25);
  const auto tr = run(g, cfg);
  const std::string counts = io::trajectory_csv(tr, false);
  CHECK(counts.rfind("t,type,X,Y,Z\n0,0,3,1,0\n", 0) == 0);
  CHECK(io::trajectory_csv(tr, true).find("0,0,0.75,0.25,0\n") != std::string::npos);
  CHECK(io::matrix_csv(Eigen::Matrix2d::Identity()) == "1,0\n0,1\n");
}

TEST_CASE("covariance export") {
  const auto dir = scratch("cov");
  const auto mp = MeanFieldProblem::from_fractions(validate_blueprint({{4}}), 0.5, law::Weibull{2.0, 5.0}, {0.01},
                                                   {0.0}, 2.0, 0.1);
  const auto sol = solve_flln(mp);
  const auto cov = eval_noise_covariance(sol, mp.blueprint, mp.lambda, mp.law, {0.5, 1.0, 2.0});
  io::write_covariance(cov, dir);
  const json index = io::read_json(dir / "covariance_index.json");
  CHECK(index.contains("blocks"));
  for (const auto& b : index["blocks"]) CHECK(fs::exists(dir / b["file"].get<std::string>()));
}

}  // TEST_SUITE

TEST_SUITE("config") {

TEST_CASE("full config parses") {
  const json doc = json::parse(R"({
    "mode": "simulate", "graph": "torus:20",
    "law": {"law": "weibull", "shape": 2, "scale": 5},
    "lambda": 0.5, "t_max": 10, "dt": 0.1, "meanfield_dt": 0.01,
    "spreader": 0.02, "stifler": [0.0], "seed": 7, "replicas": 3, "jobs": 2,
    "yy_rule": "initiator_only", "times": [1, 2], "samples": 5, "covariance_mode": "table",
    "flln_form": "separate"})");
  const auto cfg = parse_config(doc);
  CHECK(cfg.lambda == 0.5);
  CHECK(cfg.law.cdf(5.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(cfg.yy_rule == YYRule::kInitiatorOnly);
  CHECK(cfg.seed == std::optional<std::uint64_t>(7));
  CHECK(cfg.times == std::vector<double>{1, 2});
  CHECK(cfg.covariance_mode == "table");
  CHECK(make_meanfield_problem(cfg, validate_blueprint({{4}})).form == FllnForm::kSeparate);
  // The echo parses back to the same config.
  const auto again = parse_config(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));
}

TEST_CASE("schema errors carry a JSON pointer") {
  CHECK(mentions(schema_message([] { parse_config(json{{"lamda", 1.0}}); }), "/lamda"));
  CHECK(mentions(schema_message([] { parse_config(json{{"lambda", "fast"}}); }), "/lambda"));
  CHECK(mentions(schema_message([] { parse_config(json{{"law", {{"law", "weibull"}, {"shape", 2}}}}); }), "/law/scale"));
  CHECK(mentions(schema_message([] { parse_config(json{{"law", {{"law", "gamma"}}}}); }), "/law/law"));
  CHECK(mentions(schema_message([] { parse_config(json{{"law", "weibull:-1:2"}}); }), "/law"));
  CHECK(mentions(schema_message([] { parse_config(json{{"graph", {{"blueprint", {{"n_types", 1}, {"counts", {{4}}}}}}}}); }),
                 "/graph/size"));
  CHECK(mentions(schema_message([] { parse_config(json{{"graph", "hexagon:3"}}); }), "/graph"));
  CHECK(mentions(schema_message([] { parse_config(json{{"spreader", {0.1, "a"}}}); }), "/spreader/1"));
  CHECK(mentions(schema_message([] { parse_config(json{{"yy_rule", "sometimes"}}); }), "/yy_rule"));
  CHECK(mentions(schema_message([] { parse_config(json{{"replicas", 1.5}}); }), "/replicas"));
  CHECK(mentions(schema_message([] { parse_config(json{{"flln_form", "joint"}}); }), "/flln_form"));
  CHECK(mentions(schema_message([] { parse_config(json::array()); }), "/"));
}

TEST_CASE("law json forms") {
  CHECK(parse_law_json(json("exponential:2")).is_exponential());
  CHECK(parse_law_json(json{{"law", "never"}}).is_never());
  const auto l = parse_law_json(json{{"law", "cauchy"}, {"loc", 4.0}, {"scale", 1.4}});
  CHECK(parse_law_json(law_to_json(l)).cdf(3.0) == l.cdf(3.0));
  CHECK(mentions(schema_message([] { parse_law_json(json{{"law", "never"}, {"rate", 1}}); }), "/law/rate"));
}

TEST_CASE("seed fallback") {
  ::unsetenv("RUMORLAB_SEED");
  CHECK(resolve_seed(std::nullopt) == 0);
  ::setenv("RUMORLAB_SEED", "1234", 1);
  CHECK(resolve_seed(std::nullopt) == 1234);
  CHECK(resolve_seed(99) == 99);
  ::unsetenv("RUMORLAB_SEED");
}

TEST_CASE("graph specs and per-type values") {
  RunConfig cfg = parse_config(json{{"graph", {{"blueprint", {{"n_types", 2}, {"counts", {{0, 2}, {4, 0}}}}},
                                                {"size", 24}, {"seed", 3}}},
                                    {"spreader", {0.1, 0.0}}});
  const auto g = build_graph(*cfg.graph);
  CHECK(g.num_vertices() == 24);
  CHECK(graph_blueprint(*cfg.graph).counts() == g.blueprint().counts());
  const auto sim = make_sim_config(cfg, g, 5);
  CHECK(std::get<TypeProportions>(sim.initial).spreader == std::vector<double>{0.1, 0.0});
  CHECK(per_type({0.3}, 3, "spreader") == std::vector<double>{0.3, 0.3, 0.3});
  CHECK_THROWS_AS(per_type({0.3, 0.2}, 3, "spreader"), Error);
  const auto mp = make_meanfield_problem(cfg, g.blueprint());
  CHECK(mp.spreader0[0] == doctest::Approx(0.1 * 2.0 / 3.0));

  cfg = parse_config(json{{"graph", "cycle:6"}, {"initial_spreaders", {0, 3}}});
  const auto c6 = build_graph(*cfg.graph);
  const auto explicit_sim = make_sim_config(cfg, c6, 1);
  const auto& states = std::get<std::vector<VertexState>>(explicit_sim.initial);
  CHECK(states[3] == VertexState::kSpreader);
  CHECK(states[1] == VertexState::kIgnorant);
  cfg = parse_config(json{{"graph", "cycle:6"}, {"initial_spreaders", {6}}});
  CHECK(mentions(schema_message([&] { make_sim_config(cfg, c6, 1); }), "/initial_spreaders"));
}

}  // TEST_SUITE
