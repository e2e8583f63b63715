#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include "rumorlab/acceptance.hpp"
#include "rumorlab/config.hpp"
#include "rumorlab/engine.hpp"
#include "rumorlab/error.hpp"
#include "rumorlab/fluctuations.hpp"
#include "rumorlab/io.hpp"
#include "rumorlab/meanfield.hpp"
#include "rumorlab/oracle.hpp"
#include "rumorlab/qtgraph.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rumorlab;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Flag values are kept as text and merged into the config document, so
// flags and config keys share one validation path.
struct Overrides {
  std::string config_path;
  std::string out_dir = "out";
  std::map<std::string, std::string> raw;
  bool density = false;
};

void add_override(CLI::App* app, Overrides& o, const std::string& flag, const std::string& key,
                  const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&o, key](const std::string& v) { o.raw[key] = v; }, help);
}

void add_common(CLI::App* app, Overrides& o, bool with_out = true) {
  app->add_option("-c,--config", o.config_path, "JSON config file");
  if (with_out) app->add_option("-o,--out", o.out_dir, "Output directory")->capture_default_str();
  add_override(app, o, "--graph", "graph", "Graph family, e.g. torus:50, cycle:4, grid:8:6");
  add_override(app, o, "--law", "law", "Stifling law, e.g. weibull:2:5, exponential:1, never");
  add_override(app, o, "--lambda", "lambda", "Contact rate");
  add_override(app, o, "--t-max", "t_max", "Time horizon");
  add_override(app, o, "--dt", "dt", "Simulation recording step");
  add_override(app, o, "--meanfield-dt", "meanfield_dt", "Mean-field quadrature step");
  add_override(app, o, "--spreader", "spreader", "Initial spreader fraction per type (number or JSON array)");
  add_override(app, o, "--stifler", "stifler", "Initial stifler fraction per type (number or JSON array)");
  add_override(app, o, "--initial-spreaders", "initial_spreaders", "Comma-separated initial spreader vertices");
  add_override(app, o, "--seed", "seed", "Random seed (falls back to RUMORLAB_SEED, then 0)");
  add_override(app, o, "--replicas", "replicas", "Number of replicas");
  add_override(app, o, "--jobs", "jobs", "Worker threads for replicas");
  add_override(app, o, "--yy-rule", "yy_rule", "both_stifle or initiator_only");
  add_override(app, o, "--times", "times", "Comma-separated evaluation times");
  add_override(app, o, "--samples", "samples", "Number of limit samples");
  add_override(app, o, "--covariance-mode", "covariance_mode", "shot_noise or table");
  add_override(app, o, "--flln-form", "flln_form", "competing or separate");
}

json flag_value(const std::string& key, const std::string& text) {
  static const std::set<std::string> strings = {"graph", "law", "yy_rule", "covariance_mode", "flln_form"};
  static const std::set<std::string> lists = {"times", "initial_spreaders"};
  if (strings.count(key)) return text;
  std::string doc = text;
  if (lists.count(key) && (doc.empty() || doc.front() != '[')) doc = "[" + doc + "]";
  try {
    return json::parse(doc);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::kSchemaError, "at /" + key + ": cannot parse flag value '" + text + "'");
  }
}

RunConfig load(const Overrides& o, const std::string& mode) {
  json doc = o.config_path.empty() ? json::object() : io::read_json(o.config_path);
  if (!doc.is_object()) throw Error(ErrorCode::kSchemaError, "at /: config must be a JSON object");
  for (const auto& [key, text] : o.raw) doc[key] = flag_value(key, text);
  RunConfig cfg = parse_config(doc);
  if (cfg.mode.empty()) cfg.mode = mode;
  return cfg;
}

const GraphSpec& need_graph(const RunConfig& cfg) {
  if (!cfg.graph) throw Error(ErrorCode::kSchemaError, "at /graph: missing (use --graph or the config key)");
  return *cfg.graph;
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

struct Meta {
  json doc;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Meta(const std::string& command, const RunConfig& cfg) {
    doc["command"] = command;
    doc["config"] = config_to_json(cfg);
  }
  void write(const fs::path& dir) {
    doc["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    doc["created"] = timestamp();
    io::write_json(dir / "meta.json", doc);
  }
};

std::string pad(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

int cmd_graph_build(const Overrides& o) {
  const RunConfig cfg = load(o, "graph");
  Meta meta("graph build", cfg);
  const GraphSpec& spec = need_graph(cfg);
  const Graph g = build_graph(spec);
  const fs::path dir = o.out_dir;
  io::write_graph(g, dir / "graph_edges.csv", dir / "graph.json");
  const RealizationReport rep = verify_realization(g);
  meta.doc["vertices"] = g.num_vertices();
  meta.doc["edges"] = g.num_edges();
  meta.doc["connected"] = rep.connected;
  meta.write(dir);
  std::cout << "built " << g.num_vertices() << " vertices, " << g.num_edges() << " edges, "
            << g.blueprint().n_types() << " types" << (rep.connected ? "" : " (disconnected)") << "\n";
  return 0;
}

int cmd_graph_verify(const Overrides& o, const std::string& edges, const std::string& sidecar) {
  std::optional<Graph> g;
  if (!edges.empty()) {
    g.emplace(io::read_graph(edges, sidecar));
  } else {
    g.emplace(build_graph(need_graph(load(o, "graph"))));
  }
  const RealizationReport rep = verify_realization(*g);
  std::cout << (rep.pass ? "PASS" : "FAIL") << " verify: " << g->num_vertices() << " vertices, proportions [";
  for (std::size_t i = 0; i < rep.empirical_proportions.size(); ++i)
    std::cout << (i ? ", " : "") << io::format_number(rep.empirical_proportions[i]);
  std::cout << "], connected " << (rep.connected ? "yes" : "no");
  if (!rep.message.empty()) std::cout << "; " << rep.message;
  std::cout << "\n";
  return rep.pass ? 0 : kExitFail;
}

int cmd_simulate(const Overrides& o) {
  RunConfig cfg = load(o, "simulate");
  cfg.seed = resolve_seed(cfg.seed);
  Meta meta("simulate", cfg);
  const Graph g = build_graph(need_graph(cfg));
  const SimConfig sc = make_sim_config(cfg, g, *cfg.seed);
  const fs::path dir = o.out_dir;
  std::int64_t events = 0;
  if (cfg.replicas == 1) {
    const Trajectory tr = run(g, sc);
    io::write_text(dir / "trajectory_000.csv", io::trajectory_csv(tr, o.density));
    events = tr.events;
  } else {
    const ReplicaSet set = run_replicas(g, sc, cfg.replicas, *cfg.seed, cfg.jobs);
    for (std::size_t r = 0; r < set.runs.size(); ++r) {
      io::write_text(dir / ("trajectory_" + pad(r) + ".csv"), io::trajectory_csv(set.runs[r], o.density));
      events += set.runs[r].events;
    }
    io::write_text(dir / "trajectory_summary.csv", io::replica_summary_csv(set));
  }
  meta.doc["seed"] = *cfg.seed;
  meta.doc["events"] = events;
  meta.doc["vertices"] = g.num_vertices();
  meta.write(dir);
  std::cout << "simulated " << cfg.replicas << " run(s) on " << g.num_vertices() << " vertices, " << events
            << " events\n";
  return 0;
}

int cmd_meanfield(const Overrides& o) {
  const RunConfig cfg = load(o, "meanfield");
  Meta meta("meanfield", cfg);
  const MeanFieldProblem p = make_meanfield_problem(cfg, graph_blueprint(need_graph(cfg)));
  const MeanFieldSolution sol = solve_flln(p);
  const fs::path dir = o.out_dir;
  io::write_text(dir / "meanfield.csv", io::meanfield_csv(sol));
  meta.write(dir);
  std::cout << "solved " << sol.steps() << " steps of size " << io::format_number(p.dt) << "\n";
  return 0;
}

CovarianceMode covariance_mode(const RunConfig& cfg) {
  return cfg.covariance_mode == "table" ? CovarianceMode::kTable : CovarianceMode::kShotNoise;
}

int cmd_fclt(const Overrides& o, bool sample) {
  RunConfig cfg = load(o, sample ? "fclt-sample" : "fclt-covariance");
  cfg.seed = resolve_seed(cfg.seed);
  Meta meta(sample ? "fclt sample" : "fclt covariance", cfg);
  const TypeBlueprint bp = graph_blueprint(need_graph(cfg));
  const MeanFieldSolution sol = solve_flln(make_meanfield_problem(cfg, bp));
  const fs::path dir = o.out_dir;
  if (!sample) {
    const std::vector<double> times = cfg.times.empty() ? sol.times : cfg.times;
    const NoiseCovariance cov = eval_noise_covariance(sol, bp, cfg.lambda, cfg.law, times, covariance_mode(cfg));
    io::write_covariance(cov, dir);
    meta.write(dir);
    std::cout << "wrote " << 3 * cov.initial.size() + 4 * cov.pairs.size() << " covariance blocks on "
              << times.size() << " times\n";
    return 0;
  }
  const NoiseCovariance cov = eval_noise_covariance(sol, bp, cfg.lambda, cfg.law, sol.times, covariance_mode(cfg));
  const NoiseSampler sampler(cov);
  Rng rng(*cfg.seed);
  std::vector<FluctuationSample> samples;
  for (int i = 0; i < cfg.samples; ++i)
    samples.push_back(
        solve_fclt(sampler.draw(rng), InitialFluctuation::zero(bp.n_types()), bp, cfg.lambda, cfg.law, sol));
  io::write_text(dir / "fluctuations.csv", io::fluctuation_csv(samples));
  meta.doc["seed"] = *cfg.seed;
  meta.doc["ridge"] = sampler.max_ridge();
  meta.write(dir);
  std::cout << "drew " << samples.size() << " limit sample(s) on " << sol.times.size() << " nodes\n";
  return 0;
}

int cmd_oracle(const Overrides& o) {
  RunConfig cfg = load(o, "oracle");
  if (!cfg.initial_spreaders) cfg.initial_spreaders = std::vector<int>{0};
  Meta meta("oracle", cfg);
  const Graph g = build_graph(need_graph(cfg));
  const SimConfig sc = make_sim_config(cfg, g, 0);
  const auto& init = std::get<std::vector<VertexState>>(sc.initial);
  std::vector<double> times = cfg.times;
  if (times.empty())
    for (int i = 0; i <= grid_steps(sc); ++i) times.push_back(i * cfg.t_max / std::max(1, grid_steps(sc)));
  const OracleResult res = exact_oracle(g, cfg.lambda, cfg.law, init, times, cfg.yy_rule);
  std::string csv = "t,type,X,Y,Z\n";
  for (std::size_t i = 0; i < res.times.size(); ++i)
    for (int k = 0; k < res.n_types; ++k)
      csv += io::format_number(res.times[i]) + "," + std::to_string(k) + "," + io::format_number(res.at(i, k, 0)) +
             "," + io::format_number(res.at(i, k, 1)) + "," + io::format_number(res.at(i, k, 2)) + "\n";
  const fs::path dir = o.out_dir;
  io::write_text(dir / "oracle.csv", csv);
  meta.write(dir);
  std::cout << "exact expectations at " << times.size() << " times on " << g.num_vertices() << " vertices\n";
  return 0;
}

int cmd_acceptance(const std::string& id, const std::optional<std::uint64_t>& seed, int jobs) {
  AcceptanceOptions opts;
  if (seed) opts.seed = *seed;
  else if (std::getenv("RUMORLAB_SEED")) opts.seed = resolve_seed(std::nullopt);
  opts.jobs = jobs;
  AcceptanceRunner runner(opts);
  std::vector<AcceptanceResult> results;
  if (id == "all") {
    for (const auto& name : acceptance_ids()) {
      results.push_back(runner.run(name));
      std::cout << results.back().line() << std::endl;
    }
  } else {
    results.push_back(runner.run(id));
    std::cout << results.back().line() << std::endl;
  }
  for (const auto& r : results)
    if (!r.pass) return kExitFail;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rumor spreading on quasi-transitive graphs: simulation, mean-field and fluctuation limits"};
  app.require_subcommand(1);

  Overrides o;

  auto* graph = app.add_subcommand("graph", "Build or verify graphs");
  graph->require_subcommand(1);
  auto* build = graph->add_subcommand("build", "Build a graph and write graph_edges.csv and graph.json");
  add_common(build, o);
  auto* verify = graph->add_subcommand("verify", "Check a graph against its blueprint");
  add_common(verify, o, false);
  std::string edges, sidecar;
  verify->add_option("--edges", edges, "Edge-list CSV");
  verify->add_option("--sidecar", sidecar, "Sidecar JSON with type_of")->needs(verify->get_option("--edges"));
  verify->get_option("--edges")->needs(verify->get_option("--sidecar"));

  auto* simulate = app.add_subcommand("simulate", "Run the stochastic process");
  add_common(simulate, o);
  simulate->add_flag("--density", o.density, "Write densities instead of counts");

  auto* meanfield = app.add_subcommand("meanfield", "Solve the mean-field integral equations");
  add_common(meanfield, o);

  auto* fclt = app.add_subcommand("fclt", "Fluctuation limit");
  fclt->require_subcommand(1);
  auto* fclt_sample = fclt->add_subcommand("sample", "Draw limit fluctuation paths");
  add_common(fclt_sample, o);
  auto* fclt_cov = fclt->add_subcommand("covariance", "Export noise covariance blocks");
  add_common(fclt_cov, o);

  auto* oracle = app.add_subcommand("oracle", "Exact expectations on graphs with at most 10 vertices");
  add_common(oracle, o);

  auto* acceptance = app.add_subcommand("acceptance", "Run a named acceptance experiment");
  std::string acceptance_id;
  std::optional<std::uint64_t> acceptance_seed;
  int acceptance_jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::string> choices = acceptance_ids();
  choices.push_back("all");
  acceptance->add_option("id", acceptance_id, "Experiment id")->required()->check(CLI::IsMember(choices));
  acceptance->add_option("--seed", acceptance_seed, "Base seed");
  acceptance->add_option("--jobs", acceptance_jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (build->parsed()) return cmd_graph_build(o);
    if (verify->parsed()) return cmd_graph_verify(o, edges, sidecar);
    if (simulate->parsed()) return cmd_simulate(o);
    if (meanfield->parsed()) return cmd_meanfield(o);
    if (fclt_sample->parsed()) return cmd_fclt(o, true);
    if (fclt_cov->parsed()) return cmd_fclt(o, false);
    if (oracle->parsed()) return cmd_oracle(o);
    if (acceptance->parsed()) return cmd_acceptance(acceptance_id, acceptance_seed, acceptance_jobs);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool usage = e.code() == ErrorCode::kSchemaError || e.code() == ErrorCode::kParseError;
    return usage ? kExitUsage : kExitFail;
  }
  return kExitUsage;
}
