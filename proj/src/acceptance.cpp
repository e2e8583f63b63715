#include "rumorlab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "rumorlab/error.hpp"
#include "rumorlab/fluctuations.hpp"
#include "rumorlab/meanfield.hpp"
#include "rumorlab/oracle.hpp"
#include "rumorlab/qtgraph.hpp"

namespace rumorlab {

namespace {

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// Reference torus configuration: Weibull(2, 5) stifling, lambda = 0.5,
// one percent initial spreaders.
constexpr double kLambda = 0.5;
constexpr double kSpreader = 0.01;
constexpr double kHorizon = 20.0;
constexpr double kGridDt = 0.1;
constexpr double kProbeTime = 2.0;
constexpr int kTorusReplicas = 100;
const StiflingLaw kWeibull = law::Weibull{2.0, 5.0};

MeanFieldProblem torus_problem(double t_max, double dt) {
  return MeanFieldProblem::from_fractions(validate_blueprint({{4}}), kLambda, kWeibull, {kSpreader}, {0.0}, t_max,
                                          dt);
}

std::size_t grid_index(const Trajectory& tr, double t) {
  for (std::size_t g = 0; g < tr.times.size(); ++g)
    if (std::abs(tr.times[g] - t) < 1e-9) return g;
  throw Error(ErrorCode::kTimesOutsideGrid, "time not on the replica grid");
}

double sample_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string AcceptanceResult::line() const {
  return fmt("%s [%d] %s: %s (%.2f s)", pass ? "PASS" : "FAIL", number, id.c_str(), detail.c_str(), seconds);
}

const std::vector<std::string>& acceptance_ids() {
  static const std::vector<std::string> ids = {"oracle-c4",      "flln-torus", "variance-scaling", "quadrature-order",
                                               "classic-mt",     "gaussian-fluct", "fclt-limit",   "noise-cov",
                                               "blueprints",     "growth-margin"};
  return ids;
}

AcceptanceRunner::AcceptanceRunner(AcceptanceOptions options) : options_(options) {}

AcceptanceResult AcceptanceRunner::run(const std::string& id) {
  using Method = AcceptanceResult (AcceptanceRunner::*)();
  static const Method methods[] = {&AcceptanceRunner::oracle_c4,        &AcceptanceRunner::flln_torus,
                                   &AcceptanceRunner::variance_scaling, &AcceptanceRunner::quadrature_order,
                                   &AcceptanceRunner::classic_mt,       &AcceptanceRunner::gaussian_fluct,
                                   &AcceptanceRunner::fclt_limit,       &AcceptanceRunner::noise_cov,
                                   &AcceptanceRunner::blueprints,       &AcceptanceRunner::growth_margin};
  const auto& ids = acceptance_ids();
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw Error(ErrorCode::kInvalidArgument, "unknown acceptance id '" + id + "'");
  const auto start = std::chrono::steady_clock::now();
  AcceptanceResult res = (this->*methods[it - ids.begin()])();
  res.number = static_cast<int>(it - ids.begin()) + 1;
  res.id = id;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<AcceptanceResult> AcceptanceRunner::run_all() {
  std::vector<AcceptanceResult> out;
  for (const auto& id : acceptance_ids()) out.push_back(run(id));
  return out;
}

const std::vector<Trajectory>& AcceptanceRunner::torus_replicas(int side) {
  auto it = torus_.find(side);
  if (it != torus_.end()) return it->second;
  const Graph graph = build_family(family::Torus2D{side});
  SimConfig cfg;
  cfg.lambda = kLambda;
  cfg.law = kWeibull;
  cfg.t_max = kHorizon;
  cfg.grid_dt = kGridDt;
  cfg.initial = TypeProportions::uniform(1, kSpreader);
  ReplicaSet set = run_replicas(graph, cfg, kTorusReplicas, derive_seed(options_.seed, static_cast<std::uint64_t>(side)),
                                options_.jobs);
  return torus_.emplace(side, std::move(set.runs)).first->second;
}

AcceptanceResult AcceptanceRunner::oracle_c4() {
  constexpr int kReplicas = 100000;
  const std::vector<double> times = {0.5, 1.0, 2.0, 4.0};
  const Graph c4 = build_family(family::Cycle{4});
  const Graph p5 = build_configuration_model(validate_blueprint({{0, 1, 0}, {1, 0, 1}, {0, 2, 0}}), 5,
                                             derive_seed(options_.seed, 5))
                       .graph;
  double worst = 0.0;
  int comparisons = 0;
  bool exact_ok = true;
  for (const Graph* g : {&c4, &p5}) {
    std::vector<VertexState> init(g->num_vertices(), VertexState::kIgnorant);
    init[0] = VertexState::kSpreader;
    SimConfig cfg;
    cfg.lambda = 1.0;
    cfg.law = law::Exponential{1.0};
    cfg.t_max = 4.0;
    cfg.grid_dt = 0.5;
    cfg.initial = init;
    const ReplicaSet set = run_replicas(*g, cfg, kReplicas, derive_seed(options_.seed, 100 + g->num_vertices()),
                                        options_.jobs);
    const OracleResult exact = exact_oracle(*g, cfg.lambda, cfg.law, init, times);
    const Trajectory& shape = set.runs.front();
    for (std::size_t i = 0; i < times.size(); ++i) {
      const std::size_t gi = grid_index(shape, times[i]);
      for (int s = 0; s < 3; ++s) {
        double sum = 0.0, sum2 = 0.0;
        for (const auto& tr : set.runs) {
          const double v = static_cast<double>(tr.total(gi, s));
          sum += v;
          sum2 += v * v;
        }
        const double mean = sum / kReplicas;
        const double var = std::max(0.0, (sum2 - kReplicas * mean * mean) / (kReplicas - 1));
        double expect = 0.0;
        for (int k = 0; k < exact.n_types; ++k) expect += exact.at(i, k, s);
        const double se = std::sqrt(var / kReplicas);
        ++comparisons;
        if (se == 0.0) {
          exact_ok = exact_ok && std::abs(mean - expect) < 1e-9;
        } else {
          worst = std::max(worst, std::abs(mean - expect) / se);
        }
      }
    }
  }
  AcceptanceResult r;
  r.pass = worst <= 3.0 && exact_ok;
  r.detail = fmt("max |z| = %.3f over %d comparisons (C4 and 5-vertex path, %d replicas each)", worst,
                 comparisons, kReplicas);
  return r;
}

AcceptanceResult AcceptanceRunner::flln_torus() {
  constexpr int kUsed = 30;
  const MeanFieldSolution sol = solve_flln(torus_problem(kHorizon, 0.01));
  double err[2] = {0, 0};
  const int sides[2] = {20, 50};
  for (int i = 0; i < 2; ++i) {
    const auto& runs = torus_replicas(sides[i]);
    const Trajectory& shape = runs.front();
    const double n = static_cast<double>(shape.num_vertices());
    for (std::size_t g = 0; g < shape.times.size(); ++g) {
      const std::size_t m = sol.index_of(shape.times[g]);
      for (int s = 0; s < 3; ++s) {
        double mean = 0.0;
        for (int r = 0; r < kUsed; ++r) mean += static_cast<double>(runs[r].total(g, s)) / n;
        mean /= kUsed;
        const double ref = s == 0 ? sol.X(m, 0) : s == 1 ? sol.Y(m, 0) : sol.Z(m, 0);
        err[i] = std::max(err[i], std::abs(mean - ref));
      }
    }
  }
  AcceptanceResult r;
  r.pass = err[0] > err[1] && err[1] <= 0.03;
  r.detail = fmt("sup error L=20: %.4f, L=50: %.4f (need L=20 > L=50 and L=50 <= 0.03; %d replicas)", err[0],
                 err[1], kUsed);
  return r;
}

AcceptanceResult AcceptanceRunner::variance_scaling() {
  const auto& small = torus_replicas(20);
  const auto& large = torus_replicas(50);
  const VarianceRatio vr = variance_scaling_check(densities_at(small, kProbeTime, 2),
                                                  densities_at(large, kProbeTime, 2), derive_seed(options_.seed, 3));
  AcceptanceResult r;
  r.pass = !vr.degenerate && vr.ratio >= 3.1 && vr.ratio <= 12.5;
  r.detail = fmt("Var ratio L=20/L=50 of Z density at t=2: %.3f (95%% bootstrap CI [%.3f, %.3f]; target 6.25, band "
                 "[3.1, 12.5])",
                 vr.ratio, vr.ci_low, vr.ci_high);
  return r;
}

AcceptanceResult AcceptanceRunner::quadrature_order() {
  const ConvergenceReport rep = convergence_order(torus_problem(kHorizon, 0.01), {0.08, 0.04, 0.02, 0.01});
  AcceptanceResult r;
  r.pass = !rep.degenerate && rep.order >= 1.7 && rep.order <= 2.3;
  r.detail = fmt("order %.4f (errors vs dt=0.01: %.3e, %.3e, %.3e; pairwise orders %.3f, %.3f)", rep.order,
                 rep.errors[0], rep.errors[1], rep.errors[2], rep.pairwise_orders[0], rep.pairwise_orders[1]);
  return r;
}

AcceptanceResult AcceptanceRunner::classic_mt() {
  MeanFieldProblem p = torus_problem(kHorizon, 1e-3);
  p.law = law::Never{};
  const double gap = sup_distance(solve_flln(p), classic_mt_ode(p));
  AcceptanceResult r;
  r.pass = gap <= 1e-3;
  r.detail = fmt("sup gap Volterra vs classic ODE at dt=1e-3: %.3e (limit 1e-3)", gap);
  return r;
}

AcceptanceResult AcceptanceRunner::gaussian_fluct() {
  const auto& large = torus_replicas(50);
  const auto& small = torus_replicas(20);
  const std::size_t g = grid_index(large.front(), kProbeTime);
  const std::vector<double> z50 = center_and_rescale(large).column(g, 2);
  const std::vector<double> z20 = center_and_rescale(small).column(g, 2);
  const MomentStats st = moment_stats(z50);
  const double sd50 = sample_sd(z50), sd20 = sample_sd(z20);
  const double spread = std::max(sd50, sd20) / std::min(sd50, sd20);
  AcceptanceResult r;
  r.pass = !st.degenerate && std::abs(st.skewness) < 0.5 && std::abs(st.excess_kurtosis) < 1.0 && spread <= 1.5;
  r.detail = fmt("L=50 at t=2: skew %.3f, excess kurtosis %.3f; rescaled sd L=20 %.4f vs L=50 %.4f (ratio %.3f, "
                 "limit 1.5)",
                 st.skewness, st.excess_kurtosis, sd20, sd50, spread);
  return r;
}

AcceptanceResult AcceptanceRunner::fclt_limit() {
  constexpr int kSamples = 1000;
  const MeanFieldSolution sol = solve_flln(torus_problem(kProbeTime, 0.01));
  const TypeBlueprint bp = validate_blueprint({{4}});
  const NoiseCovariance cov = eval_noise_covariance(sol, bp, kLambda, kWeibull, sol.times);
  const NoiseSampler sampler(cov);
  Rng rng(derive_seed(options_.seed, 7));
  std::vector<double> limit;
  for (int i = 0; i < kSamples; ++i) {
    const FluctuationSample s = solve_fclt(sampler.draw(rng), InitialFluctuation::zero(1), bp, kLambda, kWeibull, sol);
    limit.push_back(s.Z(s.times.size() - 1, 0));
  }
  const double v_limit = std::pow(sample_sd(limit), 2);

  const auto& large = torus_replicas(50);
  const std::size_t g = grid_index(large.front(), kProbeTime);
  const double v_emp = std::pow(sample_sd(center_and_rescale(large).column(g, 2)), 2);
  const double gap = std::abs(v_limit - v_emp) / v_emp;
  AcceptanceResult r;
  r.pass = gap <= 0.5;
  r.detail = fmt("Var Zhat(2): limit %.5f (%d samples) vs L=50 empirical %.5f; relative gap %.3f (limit 0.5)",
                 v_limit, kSamples, v_emp, gap);
  return r;
}

AcceptanceResult AcceptanceRunner::noise_cov() {
  const double ln2 = std::numbers::ln2;
  const NoiseCheckReport rep = empirical_noise_check(law::Exponential{1.0}, 0.4, 10000, 1000,
                                                     {{ln2, ln2}, {0.3, 1.0}, {1.0, 0.3}}, derive_seed(options_.seed, 8));
  bool negative_cross = true;
  for (const auto& e : rep.entries) negative_cross = negative_cross && e.empirical_yz < 0;
  const auto& a = rep.entries[1];
  const auto& b = rep.entries[2];
  const double sym_gap = std::abs(a.empirical_yy - b.empirical_yy);
  AcceptanceResult r;
  r.pass = rep.max_abs_z <= 3.0 && negative_cross && sym_gap <= 1e-12;
  r.detail = fmt("max |z| = %.3f; Cov(ln2,ln2) = %.5f vs %.5f; cross (0.3,1) = %.5f vs %.5f; symmetry gap %.1e",
                 rep.max_abs_z, rep.entries[0].empirical_yy, rep.entries[0].formula_yy, a.empirical_yz, a.formula_yz,
                 sym_gap);
  return r;
}

AcceptanceResult AcceptanceRunner::blueprints() {
  bool ok = true;
  std::string notes;
  auto expect = [&](const TypeBlueprint& bp, const std::vector<Rational>& p, const char* name) {
    if (bp.proportions_exact() != p) {
      ok = false;
      notes += std::string(" ") + name + " proportions wrong;";
    }
  };
  const Rational third = Rational::make(1, 3), quarter = Rational::make(1, 4), fifth = Rational::make(1, 5);
  expect(family_blueprint(family::Bipartite24{4}), {Rational::make(2, 3), third}, "bipartite24");
  const TypeBlueprint grid = family_blueprint(family::DecoratedGrid{6, 4});
  expect(grid, {quarter, quarter, quarter, quarter}, "decorated grid");
  if (grid.degree(0) != 5 || grid.degree(1) != 4 || grid.degree(2) != 6 || grid.degree(3) != 5) {
    ok = false;
    notes += " decorated grid degrees wrong;";
  }
  expect(validate_blueprint({{0, 24, 2, 0, 3}, {24, 0, 2, 0, 1}, {2, 2, 0, 4, 0}, {0, 0, 4, 0, 0}, {3, 1, 0, 0, 0}}),
         {fifth, fifth, fifth, fifth, fifth}, "five-orbit");

  const std::vector<Family> families = {family::Cycle{7},         family::Cycle{12},       family::Bipartite24{4},
                                        family::Bipartite24{9},   family::DecoratedGrid{6, 4},
                                        family::DecoratedGrid{10, 8}, family::Torus2D{5}, family::Torus2D{12},
                                        family::Comb{6},          family::Comb{11},        family::Strip3{5},
                                        family::Strip3{9}};
  int passed = 0;
  for (const auto& f : families) {
    const RealizationReport rep = verify_realization(build_family(f));
    if (rep.pass) ++passed;
    else {
      ok = false;
      notes += " " + family_name(f) + ": " + rep.message + ";";
    }
  }
  AcceptanceResult r;
  r.pass = ok;
  r.detail = fmt("proportions (2/3,1/3), (1/4 x4, degrees 5,4,6,5), (1/5 x5) checked; %d/%zu family realizations "
                 "verified",
                 passed, families.size()) +
             notes;
  return r;
}

AcceptanceResult AcceptanceRunner::growth_margin() {
  constexpr std::int64_t kMax = 10000;
  std::vector<std::int64_t> table;
  for (std::int64_t r = 0; r <= kMax; ++r) table.push_back((2 * r + 1) * (2 * r + 1));
  const GrowthTable growth(table);
  bool bounds = true, monotone = true, ratio = true;
  std::int64_t prev = 0;
  for (std::int64_t n = 2; n <= kMax; ++n) {
    const std::int64_t g = boundary_margin_g(growth, n);
    bounds = bounds && g > 0 && g < n;
    monotone = monotone && g >= prev;
    prev = g;
    // (f(n) - f(n-g)) / f(n) <= M(floor(n/2))^{1/2}, squared and in integers.
    const Rational m = tail_growth_rate(growth, n / 2);
    const __int128 diff = growth.at(n) - growth.at(n - g);
    const __int128 fn = growth.at(n);
    ratio = ratio && diff * diff * m.den <= fn * fn * m.num;
  }
  const std::int64_t g100 = boundary_margin_g(growth, 100);
  const std::int64_t g1000 = boundary_margin_g(growth, 1000);
  const std::int64_t gmax = boundary_margin_g(growth, kMax);
  const bool diverging = g100 < g1000 && g1000 < gmax;
  AcceptanceResult r;
  r.pass = bounds && monotone && ratio && diverging;
  r.detail = fmt("n in [2, %lld]: 0<g<n %s, non-decreasing %s, boundary ratio bound %s; g(100)=%lld, g(1000)=%lld, "
                 "g(%lld)=%lld",
                 static_cast<long long>(kMax), bounds ? "yes" : "no", monotone ? "yes" : "no", ratio ? "yes" : "no",
                 static_cast<long long>(g100), static_cast<long long>(g1000), static_cast<long long>(kMax),
                 static_cast<long long>(gmax));
  return r;
}

}  // namespace rumorlab
