#include "rumorlab/config.hpp"

#include <cstdlib>
#include <set>

#include "rumorlab/error.hpp"
#include "rumorlab/io.hpp"

namespace rumorlab {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void schema(const std::string& pointer, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, "at " + (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

void only_keys(const json& obj, const std::string& pointer, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) schema(pointer + "/" + key, "unknown key");
}

double number(const json& v, const std::string& pointer) {
  if (!v.is_number()) schema(pointer, "expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& pointer) {
  if (!v.is_number_integer()) schema(pointer, "expected an integer");
  return v.get<std::int64_t>();
}

std::string text(const json& v, const std::string& pointer) {
  if (!v.is_string()) schema(pointer, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& pointer) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) schema(pointer, "expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], pointer + "/" + std::to_string(i)));
  return out;
}

// Wraps library validation errors so they carry the pointer too.
template <class Fn>
auto at_pointer(const std::string& pointer, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaError) throw;
    schema(pointer, e.what());
  }
}

}  // namespace

StiflingLaw parse_law_json(const json& v, const std::string& pointer) {
  if (v.is_string()) return at_pointer(pointer, [&] { return parse_law(v.get<std::string>()); });
  if (!v.is_object()) schema(pointer, "expected a law string or object");
  if (!v.contains("law")) schema(pointer + "/law", "missing");
  const std::string name = text(v.at("law"), pointer + "/law");
  auto get = [&](const char* key) {
    if (!v.contains(key)) schema(pointer + "/" + key, "missing");
    return number(v.at(key), pointer + "/" + key);
  };
  return at_pointer(pointer, [&]() -> StiflingLaw {
    if (name == "exponential" || name == "exp") {
      only_keys(v, pointer, {"law", "rate"});
      return law::Exponential{get("rate")};
    }
    if (name == "weibull") {
      only_keys(v, pointer, {"law", "shape", "scale"});
      return law::Weibull{get("shape"), get("scale")};
    }
    if (name == "cauchy" || name == "truncated_cauchy") {
      only_keys(v, pointer, {"law", "loc", "scale"});
      return law::TruncatedCauchy{get("loc"), get("scale")};
    }
    if (name == "deterministic") {
      only_keys(v, pointer, {"law", "t0"});
      return law::Deterministic{get("t0")};
    }
    if (name == "never") {
      only_keys(v, pointer, {"law"});
      return law::Never{};
    }
    if (name == "immediate") {
      only_keys(v, pointer, {"law"});
      return law::Immediate{};
    }
    schema(pointer + "/law", "unknown law '" + name + "'");
  });
}

json law_to_json(const StiflingLaw& law) {
  return std::visit(Overloaded{
                        [](const law::Exponential& l) { return json{{"law", "exponential"}, {"rate", l.rate}}; },
                        [](const law::Weibull& l) {
                          return json{{"law", "weibull"}, {"shape", l.shape}, {"scale", l.scale}};
                        },
                        [](const law::TruncatedCauchy& l) {
                          return json{{"law", "cauchy"}, {"loc", l.loc}, {"scale", l.scale}};
                        },
                        [](const law::Deterministic& l) { return json{{"law", "deterministic"}, {"t0", l.t0}}; },
                        [](const law::Never&) { return json{{"law", "never"}}; },
                        [](const law::Immediate&) { return json{{"law", "immediate"}}; },
                    },
                    law.variant());
}

GraphSpec parse_graph_spec(const json& v, const std::string& pointer) {
  GraphSpec spec;
  if (v.is_string()) {
    spec.family = at_pointer(pointer, [&] { return parse_family(v.get<std::string>()); });
    return spec;
  }
  if (!v.is_object()) schema(pointer, "expected a family string or an object");
  only_keys(v, pointer, {"family", "blueprint", "size", "seed", "edges", "sidecar"});
  if (v.contains("family")) {
    spec.family = at_pointer(pointer + "/family", [&] { return parse_family(text(v.at("family"), pointer + "/family")); });
  } else if (v.contains("blueprint")) {
    spec.blueprint = io::blueprint_from_json(v.at("blueprint"), pointer + "/blueprint");
    if (!v.contains("size")) schema(pointer + "/size", "missing (needed with a blueprint)");
    spec.size = static_cast<int>(integer(v.at("size"), pointer + "/size"));
    if (v.contains("seed")) spec.seed = static_cast<std::uint64_t>(integer(v.at("seed"), pointer + "/seed"));
  } else if (v.contains("edges")) {
    spec.edges_path = text(v.at("edges"), pointer + "/edges");
    if (!v.contains("sidecar")) schema(pointer + "/sidecar", "missing (needed with edges)");
    spec.sidecar_path = text(v.at("sidecar"), pointer + "/sidecar");
  } else {
    schema(pointer, "needs one of family, blueprint or edges");
  }
  return spec;
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) schema("", "config must be a JSON object");
  only_keys(doc, "", {"mode", "graph", "law", "lambda", "t_max", "dt", "meanfield_dt", "spreader", "stifler",
                      "initial_spreaders", "seed", "replicas", "jobs", "yy_rule", "times", "samples",
                      "covariance_mode", "flln_form"});
  RunConfig cfg;
  if (doc.contains("mode")) cfg.mode = text(doc["mode"], "/mode");
  if (doc.contains("graph")) cfg.graph = parse_graph_spec(doc["graph"]);
  if (doc.contains("law")) cfg.law = parse_law_json(doc["law"]);
  auto positive = [&](const char* key, double& slot) {
    if (!doc.contains(key)) return;
    slot = number(doc[key], std::string("/") + key);
    if (!(slot > 0)) schema(std::string("/") + key, "must be > 0");
  };
  positive("lambda", cfg.lambda);
  positive("dt", cfg.dt);
  positive("meanfield_dt", cfg.meanfield_dt);
  if (doc.contains("t_max")) {
    cfg.t_max = number(doc["t_max"], "/t_max");
    if (!(cfg.t_max >= 0)) schema("/t_max", "must be >= 0");
  }
  if (doc.contains("spreader")) cfg.spreader = numbers(doc["spreader"], "/spreader");
  if (doc.contains("stifler")) cfg.stifler = numbers(doc["stifler"], "/stifler");
  for (std::size_t i = 0; i < cfg.spreader.size(); ++i)
    if (!(cfg.spreader[i] >= 0 && cfg.spreader[i] <= 1)) schema("/spreader", "fractions must lie in [0,1]");
  for (std::size_t i = 0; i < cfg.stifler.size(); ++i)
    if (!(cfg.stifler[i] >= 0 && cfg.stifler[i] <= 1)) schema("/stifler", "fractions must lie in [0,1]");
  if (doc.contains("initial_spreaders")) {
    const json& v = doc["initial_spreaders"];
    if (!v.is_array()) schema("/initial_spreaders", "expected an array of vertex ids");
    std::vector<int> ids;
    for (std::size_t i = 0; i < v.size(); ++i)
      ids.push_back(static_cast<int>(integer(v[i], "/initial_spreaders/" + std::to_string(i))));
    cfg.initial_spreaders = ids;
  }
  if (doc.contains("seed")) {
    const std::int64_t s = integer(doc["seed"], "/seed");
    if (s < 0) schema("/seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  auto count = [&](const char* key, int& slot, int lo) {
    if (!doc.contains(key)) return;
    const std::int64_t v = integer(doc[key], std::string("/") + key);
    if (v < lo) schema(std::string("/") + key, "must be >= " + std::to_string(lo));
    slot = static_cast<int>(v);
  };
  count("replicas", cfg.replicas, 1);
  count("jobs", cfg.jobs, 1);
  count("samples", cfg.samples, 1);
  if (doc.contains("yy_rule")) {
    const std::string r = text(doc["yy_rule"], "/yy_rule");
    if (r == "both_stifle") cfg.yy_rule = YYRule::kBothStifle;
    else if (r == "initiator_only") cfg.yy_rule = YYRule::kInitiatorOnly;
    else schema("/yy_rule", "expected both_stifle or initiator_only");
  }
  if (doc.contains("times")) cfg.times = numbers(doc["times"], "/times");
  if (doc.contains("covariance_mode")) {
    cfg.covariance_mode = text(doc["covariance_mode"], "/covariance_mode");
    if (cfg.covariance_mode != "shot_noise" && cfg.covariance_mode != "table")
      schema("/covariance_mode", "expected shot_noise or table");
  }
  if (doc.contains("flln_form")) {
    cfg.flln_form = text(doc["flln_form"], "/flln_form");
    if (cfg.flln_form != "competing" && cfg.flln_form != "separate")
      schema("/flln_form", "expected competing or separate");
  }
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json out;
  if (!cfg.mode.empty()) out["mode"] = cfg.mode;
  if (cfg.graph) {
    const GraphSpec& g = *cfg.graph;
    if (g.family) out["graph"] = family_name(*g.family);
    else if (g.blueprint) out["graph"] = {{"blueprint", io::blueprint_to_json(*g.blueprint)}, {"size", g.size}, {"seed", g.seed}};
    else out["graph"] = {{"edges", g.edges_path}, {"sidecar", g.sidecar_path}};
  }
  out["law"] = law_to_json(cfg.law);
  out["lambda"] = cfg.lambda;
  out["t_max"] = cfg.t_max;
  out["dt"] = cfg.dt;
  out["meanfield_dt"] = cfg.meanfield_dt;
  out["spreader"] = cfg.spreader;
  out["stifler"] = cfg.stifler;
  if (cfg.initial_spreaders) out["initial_spreaders"] = *cfg.initial_spreaders;
  if (cfg.seed) out["seed"] = *cfg.seed;
  out["replicas"] = cfg.replicas;
  out["jobs"] = cfg.jobs;
  out["yy_rule"] = cfg.yy_rule == YYRule::kBothStifle ? "both_stifle" : "initiator_only";
  if (!cfg.times.empty()) out["times"] = cfg.times;
  out["samples"] = cfg.samples;
  out["covariance_mode"] = cfg.covariance_mode;
  out["flln_form"] = cfg.flln_form;
  return out;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed) {
  if (explicit_seed) return *explicit_seed;
  if (const char* env = std::getenv("RUMORLAB_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::kParseError, std::string("RUMORLAB_SEED is not an unsigned integer: ") + env);
  }
  return 0;
}

Graph build_graph(const GraphSpec& spec) {
  if (spec.family) return build_family(*spec.family);
  if (spec.blueprint) return build_configuration_model(*spec.blueprint, spec.size, spec.seed).graph;
  return io::read_graph(spec.edges_path, spec.sidecar_path);
}

TypeBlueprint graph_blueprint(const GraphSpec& spec) {
  if (spec.family) return family_blueprint(*spec.family);
  if (spec.blueprint) return *spec.blueprint;
  return io::read_graph(spec.edges_path, spec.sidecar_path).blueprint();
}

std::vector<double> per_type(const std::vector<double>& values, int n_types, const char* what) {
  if (values.size() == 1) return std::vector<double>(n_types, values[0]);
  if (static_cast<int>(values.size()) != n_types)
    throw Error(ErrorCode::kSchemaError, std::string("at /") + what + ": expected 1 or " +
                                             std::to_string(n_types) + " values");
  return values;
}

SimConfig make_sim_config(const RunConfig& cfg, const Graph& graph, std::uint64_t seed) {
  SimConfig sc;
  sc.lambda = cfg.lambda;
  sc.law = cfg.law;
  sc.t_max = cfg.t_max;
  sc.grid_dt = cfg.dt;
  sc.seed = seed;
  sc.yy_rule = cfg.yy_rule;
  if (cfg.initial_spreaders) {
    std::vector<VertexState> states(graph.num_vertices(), VertexState::kIgnorant);
    for (int v : *cfg.initial_spreaders) {
      if (v < 0 || v >= graph.num_vertices())
        throw Error(ErrorCode::kSchemaError, "at /initial_spreaders: vertex " + std::to_string(v) + " out of range");
      states[v] = VertexState::kSpreader;
    }
    sc.initial = states;
  } else {
    const int n = graph.blueprint().n_types();
    TypeProportions tp;
    tp.spreader = per_type(cfg.spreader, n, "spreader");
    tp.stifler = per_type(cfg.stifler, n, "stifler");
    for (int k = 0; k < n; ++k) tp.ignorant.push_back(1.0 - tp.spreader[k] - tp.stifler[k]);
    sc.initial = tp;
  }
  validate_config(graph, sc);
  return sc;
}

MeanFieldProblem make_meanfield_problem(const RunConfig& cfg, const TypeBlueprint& bp) {
  const int n = bp.n_types();
  MeanFieldProblem p = MeanFieldProblem::from_fractions(bp, cfg.lambda, cfg.law, per_type(cfg.spreader, n, "spreader"),
                                                        per_type(cfg.stifler, n, "stifler"), cfg.t_max, cfg.meanfield_dt);
  p.form = cfg.flln_form == "separate" ? FllnForm::kSeparate : FllnForm::kCompeting;
  return p;
}

}  // namespace rumorlab
