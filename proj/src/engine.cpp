#include "rumorlab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rumorlab/error.hpp"

namespace rumorlab {

TypeProportions TypeProportions::uniform(int n_types, double spreader, double stifler) {
  TypeProportions p;
  p.ignorant.assign(n_types, 1.0 - spreader - stifler);
  p.spreader.assign(n_types, spreader);
  p.stifler.assign(n_types, stifler);
  return p;
}

int grid_steps(const SimConfig& cfg) {
  return static_cast<int>(std::llround(cfg.t_max / cfg.grid_dt));
}

void validate_config(const Graph& graph, const SimConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (!(std::isfinite(cfg.lambda) && cfg.lambda > 0)) fail("lambda must be > 0");
  if (!(std::isfinite(cfg.t_max) && cfg.t_max >= 0)) fail("t_max must be >= 0");
  if (!(std::isfinite(cfg.grid_dt) && cfg.grid_dt > 0)) fail("grid_dt must be > 0");
  const double ratio = cfg.t_max / cfg.grid_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    fail("grid_dt must divide t_max");
  if (const auto* p = std::get_if<TypeProportions>(&cfg.initial)) {
    const auto k = static_cast<std::size_t>(graph.blueprint().n_types());
    if (p->ignorant.size() != k || p->spreader.size() != k || p->stifler.size() != k)
      fail("initial proportions need one entry per type");
    for (std::size_t i = 0; i < k; ++i) {
      if (p->ignorant[i] < 0 || p->spreader[i] < 0 || p->stifler[i] < 0)
        fail("initial proportions must be non-negative");
      if (std::abs(p->ignorant[i] + p->spreader[i] + p->stifler[i] - 1.0) > 1e-9)
        fail("initial proportions of type " + std::to_string(i) + " must sum to 1");
    }
  } else {
    const auto& states = std::get<std::vector<VertexState>>(cfg.initial);
    if (states.size() != static_cast<std::size_t>(graph.num_vertices()))
      fail("explicit initial state needs one entry per vertex");
  }
}

SimState::SimState(const Graph& graph, const SimConfig& cfg, Rng& rng)
    : graph_(&graph), cfg_(&cfg) {
  validate_config(graph, cfg);
  const int n = graph.num_vertices();
  const int k = graph.blueprint().n_types();
  state_.assign(n, VertexState::kIgnorant);

  if (const auto* p = std::get_if<TypeProportions>(&cfg.initial)) {
    std::vector<std::vector<int>> members(k);
    for (int v = 0; v < n; ++v) members[graph.type_of(v)].push_back(v);
    for (int t = 0; t < k; ++t) {
      auto& m = members[t];
      const auto size = static_cast<std::int64_t>(m.size());
      const std::int64_t spreaders = std::llround(p->spreader[t] * size);
      const std::int64_t stiflers = std::llround(p->stifler[t] * size);
      if (spreaders + stiflers > size)
        throw Error(ErrorCode::kProportionRoundingImpossible,
                    "type " + std::to_string(t) + ": rounded spreaders + stiflers exceed #V_k");
      // Partial Fisher-Yates: the first spreaders + stiflers slots are a
      // uniform random ordered sample of the type.
      for (std::int64_t i = 0; i < spreaders + stiflers; ++i) {
        const auto j = i + static_cast<std::int64_t>(rng.below(size - i));
        std::swap(m[i], m[j]);
      }
      for (std::int64_t i = 0; i < spreaders; ++i) state_[m[i]] = VertexState::kSpreader;
      for (std::int64_t i = spreaders; i < spreaders + stiflers; ++i)
        state_[m[i]] = VertexState::kStifler;
    }
  } else {
    state_ = std::get<std::vector<VertexState>>(cfg.initial);
  }

  counts_.assign(k, {0, 0, 0});
  for (int v = 0; v < n; ++v) ++counts_[graph.type_of(v)][static_cast<int>(state_[v])];

  category_.assign(graph.num_edges(), EdgeCategory::kNone);
  position_.assign(graph.num_edges(), -1);
  for (int e = 0; e < graph.num_edges(); ++e) {
    const EdgeCategory c = classify(e);
    category_[e] = c;
    if (c != EdgeCategory::kNone) {
      auto& set = members_[static_cast<int>(c)];
      position_[e] = static_cast<int>(set.size());
      set.push_back(e);
    }
  }

  conversions_.assign(k, 0);
  contact_stiflings_.assign(k, 0);
  spontaneous_.assign(k, 0);
  for (int v = 0; v < n; ++v)
    if (state_[v] == VertexState::kSpreader) schedule(v, rng);
}

EdgeCategory SimState::classify(int edge) const {
  const auto [u, v] = graph_->edges()[edge];
  const auto a = state_[u];
  const auto b = state_[v];
  using S = VertexState;
  if (a == S::kSpreader && b == S::kSpreader) return EdgeCategory::kYY;
  if (a != S::kSpreader && b != S::kSpreader) return EdgeCategory::kNone;
  const auto other = (a == S::kSpreader) ? b : a;
  return other == S::kIgnorant ? EdgeCategory::kXY : EdgeCategory::kYZ;
}

void SimState::schedule(int v, Rng& rng) {
  const double eta = cfg_->law.sample(rng);
  if (std::isfinite(eta)) pending_.emplace(clock_ + eta, v);
}

void SimState::refresh_edges(int v) {
  for (int e : graph_->incident_edges(v)) {
    const EdgeCategory now = classify(e);
    const EdgeCategory before = category_[e];
    if (now == before) continue;
    if (before != EdgeCategory::kNone) {
      auto& set = members_[static_cast<int>(before)];
      const int pos = position_[e];
      set[pos] = set.back();
      position_[set[pos]] = pos;
      set.pop_back();
    }
    if (now != EdgeCategory::kNone) {
      auto& set = members_[static_cast<int>(now)];
      position_[e] = static_cast<int>(set.size());
      set.push_back(e);
    } else {
      position_[e] = -1;
    }
    category_[e] = now;
  }
}

void SimState::set_state(int v, VertexState s, Rng& rng) {
  auto& c = counts_[graph_->type_of(v)];
  --c[static_cast<int>(state_[v])];
  ++c[static_cast<int>(s)];
  state_[v] = s;
  refresh_edges(v);
  if (s == VertexState::kSpreader) schedule(v, rng);
}

std::optional<Event> SimState::plan(Rng& rng) {
  // Entries for vertices already stifled by contact are stale.
  while (!pending_.empty() && state_[pending_.top().second] != VertexState::kSpreader)
    pending_.pop();

  const double head = pending_.empty() ? kNeverTime : pending_.top().first;
  const std::int64_t active = active_edges();
  double contact = kNeverTime;
  if (active > 0) contact = clock_ + rng.exponential(cfg_->lambda * static_cast<double>(active));

  if (head == kNeverTime && contact == kNeverTime) return std::nullopt;

  // Ties go to the scheduled stifling.
  if (head <= contact) {
    Event ev{Event::Kind::kSpontaneous, head};
    ev.changed[0] = pending_.top().second;
    return ev;
  }

  Event ev{Event::Kind::kContact, contact};
  const auto pick = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(active)));
  const std::int64_t n_xy = category_size(EdgeCategory::kXY);
  const std::int64_t n_yy = category_size(EdgeCategory::kYY);
  if (pick < n_xy) {
    ev.category = EdgeCategory::kXY;
  } else if (pick < n_xy + n_yy) {
    ev.category = EdgeCategory::kYY;
  } else {
    ev.category = EdgeCategory::kYZ;
  }
  const auto& set = members_[static_cast<int>(ev.category)];
  const int edge = set[rng.below(set.size())];
  const auto [u, v] = graph_->edges()[edge];
  switch (ev.category) {
    case EdgeCategory::kXY:
      ev.changed[0] = (state_[u] == VertexState::kIgnorant) ? u : v;
      break;
    case EdgeCategory::kYZ:
      ev.changed[0] = (state_[u] == VertexState::kSpreader) ? u : v;
      break;
    case EdgeCategory::kYY:
      if (cfg_->yy_rule == YYRule::kBothStifle) {
        ev.changed = {u, v};
      } else {
        ev.changed[0] = (rng.below(2) == 0) ? u : v;
      }
      break;
    case EdgeCategory::kNone:
      break;
  }
  return ev;
}

void SimState::apply(const Event& ev, Rng& rng) {
  clock_ = ev.time;
  ++events_;
  if (ev.kind == Event::Kind::kSpontaneous) {
    pending_.pop();
    const int v = ev.changed[0];
    ++spontaneous_[graph_->type_of(v)];
    set_state(v, VertexState::kStifler, rng);
  } else if (ev.category == EdgeCategory::kXY) {
    const int v = ev.changed[0];
    ++conversions_[graph_->type_of(v)];
    set_state(v, VertexState::kSpreader, rng);
  } else {
    for (int v : ev.changed) {
      if (v < 0) continue;
      ++contact_stiflings_[graph_->type_of(v)];
      set_state(v, VertexState::kStifler, rng);
    }
  }
  if (cfg_->debug_checks) check_invariants();
}

void SimState::check_invariants() const {
  const int k = graph_->blueprint().n_types();
  for (int t = 0; t < k; ++t) {
    const auto& c = counts_[t];
    if (c[0] + c[1] + c[2] != graph_->type_sizes()[t] || c[0] < 0 || c[1] < 0 || c[2] < 0)
      throw Error(ErrorCode::kInvalidArgument, "conservation violated for type " + std::to_string(t));
  }
  std::array<std::int64_t, 3> recount{0, 0, 0};
  for (int e = 0; e < graph_->num_edges(); ++e) {
    const EdgeCategory c = classify(e);
    if (c != category_[e]) throw Error(ErrorCode::kInvalidArgument, "stale category on edge " + std::to_string(e));
    if (c != EdgeCategory::kNone) {
      ++recount[static_cast<int>(c)];
      if (members_[static_cast<int>(c)][position_[e]] != e)
        throw Error(ErrorCode::kInvalidArgument, "category index broken at edge " + std::to_string(e));
    }
  }
  for (int c = 0; c < 3; ++c)
    if (recount[c] != static_cast<std::int64_t>(members_[c].size()))
      throw Error(ErrorCode::kInvalidArgument, "category count mismatch");
}

std::optional<Event> step(SimState& state, Rng& rng) {
  auto ev = state.plan(rng);
  if (ev) state.apply(*ev, rng);
  return ev;
}

std::int64_t Trajectory::total(std::size_t g, int s) const {
  std::int64_t sum = 0;
  for (int k = 0; k < n_types; ++k) sum += at(g, k, s);
  return sum;
}

std::int64_t Trajectory::num_vertices() const {
  std::int64_t n = 0;
  for (int s : type_sizes) n += s;
  return n;
}

Trajectory run(const Graph& graph, const SimConfig& cfg) {
  Rng rng(cfg.seed);
  SimState state(graph, cfg, rng);

  Trajectory traj;
  traj.n_types = graph.blueprint().n_types();
  traj.type_sizes = graph.type_sizes();
  const int steps = grid_steps(cfg);
  const double dt = steps > 0 ? cfg.t_max / steps : 0.0;
  for (int g = 0; g <= steps; ++g) traj.times.push_back(g == steps ? cfg.t_max : g * dt);
  traj.counts.reserve(traj.times.size() * traj.n_types * 3);

  auto record = [&] {
    for (const auto& c : state.counts()) traj.counts.insert(traj.counts.end(), c.begin(), c.end());
  };

  std::size_t next = 0;
  while (next < traj.times.size()) {
    const auto ev = state.plan(rng);
    const double when = ev ? ev->time : kNeverTime;
    while (next < traj.times.size() && traj.times[next] <= when) {
      record();
      ++next;
    }
    if (!ev || when > cfg.t_max) break;
    state.apply(*ev, rng);
  }
  while (next < traj.times.size()) {
    record();
    ++next;
  }

  traj.conversions = state.conversions();
  traj.contact_stiflings = state.contact_stiflings();
  traj.spontaneous_stiflings = state.spontaneous_stiflings();
  traj.events = state.event_count();
  return traj;
}

void summarize(ReplicaSet& set) {
  set.mean.clear();
  set.variance.clear();
  if (set.runs.empty()) return;
  const std::size_t len = set.runs.front().counts.size();
  for (const auto& r : set.runs)
    if (r.counts.size() != len) throw Error(ErrorCode::kGridMismatch, "replicas have different grids");
  const double n = static_cast<double>(set.runs.size());
  set.mean.assign(len, 0.0);
  set.variance.assign(len, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    double m = 0.0;
    for (const auto& r : set.runs) m += static_cast<double>(r.counts[i]);
    m /= n;
    double ss = 0.0;
    for (const auto& r : set.runs) {
      const double d = static_cast<double>(r.counts[i]) - m;
      ss += d * d;
    }
    set.mean[i] = m;
    set.variance[i] = set.runs.size() > 1 ? ss / (n - 1.0) : 0.0;
  }
}

ReplicaSet run_replicas(const Graph& graph, const SimConfig& cfg, int n_runs,
                        std::uint64_t base_seed, int jobs) {
  if (n_runs < 1) throw Error(ErrorCode::kInvalidArgument, "n_runs must be >= 1");
  validate_config(graph, cfg);
  ReplicaSet set;
  set.runs.resize(n_runs);
  auto work = [&](int first, int stride) {
    for (int r = first; r < n_runs; r += stride) {
      SimConfig local = cfg;
      local.seed = derive_seed(base_seed, static_cast<std::uint64_t>(r));
      set.runs[r] = run(graph, local);
    }
  };
  jobs = std::clamp(jobs, 1, n_runs);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
  }
  summarize(set);
  return set;
}

}  // namespace rumorlab
