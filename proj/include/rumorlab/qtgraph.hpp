#pragma once

// Quasi-transitive graphs described by type blueprints: inter-type neighbor
// counts n_i(j) and the type proportions they force.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rumorlab {

/// Exact non-negative fraction, always stored in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

Rational operator+(const Rational& a, const Rational& b);
Rational operator*(const Rational& a, const Rational& b);
Rational operator/(const Rational& a, const Rational& b);

using CountMatrix = std::vector<std::vector<int>>;

/// n_types vertex types, neighbor_counts(i, j) = n_i(j), and the unique
/// proportion vector p with p_i n_i(j) = p_j n_j(i), sum p = 1.
class TypeBlueprint {
 public:
  int n_types() const { return static_cast<int>(counts_.size()); }
  int count(int i, int j) const { return counts_[i][j]; }
  const CountMatrix& counts() const { return counts_; }
  int degree(int i) const;

  const std::vector<Rational>& proportions_exact() const { return exact_; }
  double proportion(int i) const { return proportions_[i]; }
  const std::vector<double>& proportions() const { return proportions_; }

  /// c_{k,j} = n_k(j) / p_j, the per-density contact coefficient.
  double coupling(int k, int j) const { return counts_[k][j] / proportions_[j]; }

  friend TypeBlueprint validate_blueprint(const CountMatrix& counts);

 private:
  CountMatrix counts_;
  std::vector<Rational> exact_;
  std::vector<double> proportions_;
};

/// Throws Error{InconsistentCounts | DisconnectedTypes | ZeroDegreeType |
/// InvalidArgument}.
TypeBlueprint validate_blueprint(const CountMatrix& counts);

/// Undirected simple graph in CSR form with a type label per vertex.
class Graph {
 public:
  Graph(TypeBlueprint blueprint, std::vector<int> type_of,
        const std::vector<std::pair<int, int>>& edges);

  int num_vertices() const { return static_cast<int>(type_of_.size()); }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }
  int type_of(int v) const { return type_of_[v]; }
  const std::vector<int>& types() const { return type_of_; }
  const TypeBlueprint& blueprint() const { return blueprint_; }

  std::span<const int> neighbors(int v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  /// Edge ids aligned with neighbors(v).
  std::span<const int> incident_edges(int v) const {
    return {edge_ids_.data() + offsets_[v], edge_ids_.data() + offsets_[v + 1]};
  }
  int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }

  /// Edges as (u, v) with u < v, sorted lexicographically.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// #V_k for each type.
  const std::vector<int>& type_sizes() const { return type_sizes_; }

 private:
  TypeBlueprint blueprint_;
  std::vector<int> type_of_;
  std::vector<int> offsets_;
  std::vector<int> adjacency_;
  std::vector<int> edge_ids_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> type_sizes_;
};

namespace family {
struct Cycle { int n; };
struct Bipartite24 { int n; };
struct DecoratedGrid { int m; int n; };
struct Torus2D { int side; };
struct Comb { int n; };
struct Strip3 { int n; };
}  // namespace family

using Family = std::variant<family::Cycle, family::Bipartite24, family::DecoratedGrid,
                            family::Torus2D, family::Comb, family::Strip3>;

/// The blueprint every member of the family realizes, independent of size.
TypeBlueprint family_blueprint(const Family& family);

/// Throws Error{SizeTooSmall | OddGridDimension}.
Graph build_family(const Family& family);

/// Parses "cycle:7", "bipartite24:8", "grid:8:6", "torus:50", "comb:10",
/// "strip3:10".
Family parse_family(const std::string& text);
std::string family_name(const Family& family);

struct ConfigModelOptions {
  int max_restarts = 100;
  /// Random partner draws per stub before a restart is declared.
  int tries_per_stub = 64;
};

struct ConfigModelResult {
  Graph graph;
  bool connected;
  int restarts_used;
};

/// Random simple graph realizing `blueprint` on `target_size` vertices.
/// Throws Error{InfeasibleSize | MatchingFailed}.
ConfigModelResult build_configuration_model(const TypeBlueprint& blueprint, int target_size,
                                            std::uint64_t seed,
                                            const ConfigModelOptions& options = {});

/// Integer type sizes round(p_i N) if they satisfy the stub-parity
/// conditions, nullopt otherwise.
std::optional<std::vector<int>> feasible_type_sizes(const TypeBlueprint& blueprint,
                                                    int target_size);

struct RealizationReport {
  bool pass = true;
  /// First vertex whose per-type neighbor counts disagree with the blueprint.
  std::optional<int> offending_vertex;
  std::string message;
  std::vector<double> empirical_proportions;
  bool connected = false;
  bool symmetric = true;
};

RealizationReport verify_realization(const Graph& graph);

/// Ball-volume table f(0..n_max) of some growth function.
class GrowthTable {
 public:
  explicit GrowthTable(std::vector<std::int64_t> values);
  std::int64_t at(std::size_t r) const { return values_[r]; }
  std::size_t max_index() const { return values_.size() - 1; }
  const std::vector<std::int64_t>& values() const { return values_; }
  /// sup over m in [max(n, 1), max_index] of (f(m) - f(m-1)) / f(m-1).
  const Rational& tail_sup(std::size_t n) const { return tail_[std::min(n, tail_.size() - 1)]; }

 private:
  std::vector<std::int64_t> values_;
  std::vector<Rational> tail_;
};

/// M(N) = sup over m in [N, max_index] of (f(m) - f(m-1)) / f(m-1). The
/// supremum over the infinite tail is truncated to the table; for growth
/// functions whose relative increments are eventually non-increasing (all
/// polynomial balls) the truncation is exact.
Rational tail_growth_rate(const GrowthTable& growth, std::int64_t n_start);

/// g(n) = max(1, min(floor(n/2), floor(M(floor(n/2))^{-1/2}))).
/// Throws Error{TableTooShort | InvalidArgument}.
std::int64_t boundary_margin_g(const GrowthTable& growth, std::int64_t n);

}  // namespace rumorlab
