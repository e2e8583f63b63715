#pragma once

// Run configuration shared by every CLI subcommand.
//
// {
//   "mode": "simulate",                 // optional, informational
//   "graph": "torus:50",                // or {"family": "torus:50"}
//                                       // or {"blueprint": {...}, "size": N, "seed": s}
//                                       // or {"edges": "g.csv", "sidecar": "g.json"}
//   "law": {"law": "weibull", "shape": 2, "scale": 5},   // or "weibull:2:5"
//   "lambda": 0.5,
//   "t_max": 20, "dt": 0.1,             // simulation grid
//   "meanfield_dt": 0.01,
//   "spreader": 0.01, "stifler": 0,     // per-type fractions (number or array)
//   "initial_spreaders": [0],           // explicit vertices; overrides fractions
//   "seed": 7, "replicas": 15, "jobs": 1,
//   "yy_rule": "both_stifle",           // or "initiator_only"
//   "times": [0.5, 1, 2],               // oracle / covariance times
//   "samples": 10,                      // fclt limit samples
//   "covariance_mode": "shot_noise",    // or "table"
//   "flln_form": "competing"            // or "separate"
// }

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "rumorlab/engine.hpp"
#include "rumorlab/meanfield.hpp"
#include "rumorlab/qtgraph.hpp"
#include "rumorlab/stifling.hpp"

namespace rumorlab {

struct GraphSpec {
  std::optional<Family> family;
  std::optional<TypeBlueprint> blueprint;
  int size = 0;
  std::uint64_t seed = 0;
  std::string edges_path;
  std::string sidecar_path;
};

struct RunConfig {
  std::string mode;
  std::optional<GraphSpec> graph;
  StiflingLaw law = law::Never{};
  double lambda = 1.0;
  double t_max = 20.0;
  double dt = 0.1;
  double meanfield_dt = 0.01;
  std::vector<double> spreader{0.01};
  std::vector<double> stifler{0.0};
  std::optional<std::vector<int>> initial_spreaders;
  std::optional<std::uint64_t> seed;
  int replicas = 1;
  int jobs = 1;
  YYRule yy_rule = YYRule::kBothStifle;
  std::vector<double> times;
  int samples = 1;
  std::string covariance_mode = "shot_noise";
  std::string flln_form = "competing";
};

/// Throws Error{SchemaError} whose message names the JSON pointer.
RunConfig parse_config(const nlohmann::json& doc);
/// Accepted "graph" forms, see the file comment.
GraphSpec parse_graph_spec(const nlohmann::json& value, const std::string& pointer = "/graph");
/// {"law": name, params...} or the compact "name:p1:p2" string.
StiflingLaw parse_law_json(const nlohmann::json& value, const std::string& pointer = "/law");
nlohmann::json law_to_json(const StiflingLaw& law);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Explicit seed, else the RUMORLAB_SEED environment variable, else 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed);

Graph build_graph(const GraphSpec& spec);
TypeBlueprint graph_blueprint(const GraphSpec& spec);

/// Broadcasts a single value to every type.
std::vector<double> per_type(const std::vector<double>& values, int n_types, const char* what);

SimConfig make_sim_config(const RunConfig& cfg, const Graph& graph, std::uint64_t seed);
MeanFieldProblem make_meanfield_problem(const RunConfig& cfg, const TypeBlueprint& bp);

}  // namespace rumorlab
