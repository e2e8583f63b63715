#pragma once

// Event-driven simulation of the Maki-Thompson rumor dynamics with
// spontaneous stifling. Every edge carries a rate-lambda contact clock;
// contacts are drawn in aggregate (total rate lambda * #active edges) and
// attributed to an edge category by thinning. Spontaneous stiflings come
// from a min-heap of scheduled times, one per spreader.

#include <array>
#include <cstdint>
#include <optional>
#include <queue>
#include <variant>
#include <vector>

#include "rumorlab/qtgraph.hpp"
#include "rumorlab/rng.hpp"
#include "rumorlab/stifling.hpp"

namespace rumorlab {

enum class VertexState : std::uint8_t { kIgnorant = 0, kSpreader = 1, kStifler = 2 };

/// What happens on a contact between two spreaders.
enum class YYRule {
  kBothStifle,     ///< both endpoints become stiflers (one B count each)
  kInitiatorOnly,  ///< one uniformly chosen endpoint stifles
};

/// Initial densities per type, each triple summing to 1 within the type.
struct TypeProportions {
  std::vector<double> ignorant;
  std::vector<double> spreader;
  std::vector<double> stifler;

  /// Same (1 - y - z, y, z) for every type.
  static TypeProportions uniform(int n_types, double spreader, double stifler = 0.0);
};

using InitialCondition = std::variant<TypeProportions, std::vector<VertexState>>;

struct SimConfig {
  double lambda = 1.0;
  StiflingLaw law = law::Never{};
  double t_max = 10.0;
  double grid_dt = 0.1;
  InitialCondition initial = TypeProportions{};
  std::uint64_t seed = 0;
  YYRule yy_rule = YYRule::kBothStifle;
  /// Recount category sizes and conservation after every event.
  bool debug_checks = false;
};

/// Throws Error{InvalidArgument} on inconsistent configs.
void validate_config(const Graph& graph, const SimConfig& cfg);

/// Number of grid intervals: round(t_max / grid_dt).
int grid_steps(const SimConfig& cfg);

enum class EdgeCategory : std::uint8_t { kXY = 0, kYY = 1, kYZ = 2, kNone = 3 };

struct Event {
  enum class Kind { kSpontaneous, kContact } kind;
  double time;
  /// Vertices that changed state (one or two).
  std::array<int, 2> changed{-1, -1};
  EdgeCategory category = EdgeCategory::kNone;
};

/// Mutable simulation state bound to one graph and config.
class SimState {
 public:
  /// Samples the initial configuration and the stifling times of the
  /// initial spreaders from `rng`. Both references must outlive the state.
  /// Throws Error{ProportionRoundingImpossible | InvalidArgument}.
  SimState(const Graph& graph, const SimConfig& cfg, Rng& rng);

  VertexState state_of(int v) const { return state_[v]; }
  double clock() const { return clock_; }

  /// Per-type counts indexed [type][0=X,1=Y,2=Z].
  const std::vector<std::array<std::int64_t, 3>>& counts() const { return counts_; }
  std::int64_t category_size(EdgeCategory c) const {
    return static_cast<std::int64_t>(members_[static_cast<int>(c)].size());
  }
  std::int64_t active_edges() const {
    return category_size(EdgeCategory::kXY) + category_size(EdgeCategory::kYY) +
           category_size(EdgeCategory::kYZ);
  }
  std::size_t pending_stiflings() const { return pending_.size(); }

  /// A_k: ignorant -> spreader conversions of type-k vertices.
  const std::vector<std::int64_t>& conversions() const { return conversions_; }
  /// B_k: contact stiflings of type-k spreaders.
  const std::vector<std::int64_t>& contact_stiflings() const { return contact_stiflings_; }
  /// Timer-driven stiflings of type-k spreaders.
  const std::vector<std::int64_t>& spontaneous_stiflings() const { return spontaneous_; }
  std::int64_t event_count() const { return events_; }

  /// Plans the next event without applying it. nullopt when no event can
  /// ever happen again. The planned time may exceed t_max.
  std::optional<Event> plan(Rng& rng);
  /// Applies a planned event and advances the clock.
  void apply(const Event& ev, Rng& rng);

  /// Full recount of categories and conservation; throws on mismatch.
  void check_invariants() const;

 private:
  EdgeCategory classify(int edge) const;
  void set_state(int v, VertexState s, Rng& rng);
  void refresh_edges(int v);
  void schedule(int v, Rng& rng);

  const Graph* graph_;
  const SimConfig* cfg_;
  std::vector<VertexState> state_;
  std::vector<std::array<std::int64_t, 3>> counts_;
  std::array<std::vector<int>, 3> members_;
  std::vector<int> position_;
  std::vector<EdgeCategory> category_;
  using Pending = std::pair<double, int>;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending_;
  std::vector<std::int64_t> conversions_;
  std::vector<std::int64_t> contact_stiflings_;
  std::vector<std::int64_t> spontaneous_;
  double clock_ = 0.0;
  std::int64_t events_ = 0;
};

/// Convenience wrapper: plan + apply. nullopt means no further event.
std::optional<Event> step(SimState& state, Rng& rng);

/// Per-type counts recorded on the uniform grid 0, dt, ..., t_max. The value
/// at a grid time is the state just before any event at that instant.
struct Trajectory {
  std::vector<double> times;
  int n_types = 0;
  /// counts[(g * n_types + k) * 3 + s] for grid point g, type k, state s.
  std::vector<std::int64_t> counts;
  std::vector<int> type_sizes;
  std::vector<std::int64_t> conversions;
  std::vector<std::int64_t> contact_stiflings;
  std::vector<std::int64_t> spontaneous_stiflings;
  std::int64_t events = 0;

  std::int64_t at(std::size_t g, int k, int s) const { return counts[(g * n_types + k) * 3 + s]; }
  /// Summed over types.
  std::int64_t total(std::size_t g, int s) const;
  std::int64_t num_vertices() const;
};

Trajectory run(const Graph& graph, const SimConfig& cfg);

/// Replica r runs with seed derive_seed(base_seed, r).
struct ReplicaSet {
  std::vector<Trajectory> runs;
  /// Pointwise mean / unbiased variance of the counts, same layout as
  /// Trajectory::counts.
  std::vector<double> mean;
  std::vector<double> variance;
};

ReplicaSet run_replicas(const Graph& graph, const SimConfig& cfg, int n_runs,
                        std::uint64_t base_seed, int jobs = 1);

/// Replica mean/variance from any set of trajectories on a common grid.
void summarize(ReplicaSet& set);

}  // namespace rumorlab
