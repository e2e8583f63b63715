#include "rumorlab/qtgraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "rumorlab/error.hpp"
#include "rumorlab/rng.hpp"

namespace rumorlab {

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  return {num / (g == 0 ? 1 : g), den / (g == 0 ? 1 : g)};
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::make(a.num * b.den + b.num * a.den, a.den * b.den);
}
Rational operator*(const Rational& a, const Rational& b) {
  return Rational::make(a.num * b.num, a.den * b.den);
}
Rational operator/(const Rational& a, const Rational& b) {
  return Rational::make(a.num * b.den, a.den * b.num);
}

int TypeBlueprint::degree(int i) const {
  return std::accumulate(counts_[i].begin(), counts_[i].end(), 0);
}

TypeBlueprint validate_blueprint(const CountMatrix& counts) {
  const int n = static_cast<int>(counts.size());
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty count matrix");
  for (const auto& row : counts) {
    if (static_cast<int>(row.size()) != n)
      throw Error(ErrorCode::kInvalidArgument, "count matrix is not square");
    for (int c : row)
      if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative neighbor count");
  }
  for (int i = 0; i < n; ++i) {
    if (std::accumulate(counts[i].begin(), counts[i].end(), 0) == 0)
      throw Error(ErrorCode::kZeroDegreeType, "type " + std::to_string(i) + " has degree 0");
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((counts[i][j] > 0) != (counts[j][i] > 0))
        throw Error(ErrorCode::kInconsistentCounts,
                    "n_" + std::to_string(i) + "(" + std::to_string(j) + ") and n_" +
                        std::to_string(j) + "(" + std::to_string(i) +
                        ") must be both zero or both positive");

  // Relative sizes along a spanning tree of the type graph:
  // p_j = p_i * n_i(j) / n_j(i).
  std::vector<std::optional<Rational>> rel(n);
  rel[0] = Rational{1, 1};
  std::queue<int> frontier;
  frontier.push(0);
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int j = 0; j < n; ++j) {
      if (counts[i][j] == 0 || rel[j]) continue;
      rel[j] = *rel[i] * Rational::make(counts[i][j], counts[j][i]);
      frontier.push(j);
    }
  }
  for (int i = 0; i < n; ++i)
    if (!rel[i])
      throw Error(ErrorCode::kDisconnectedTypes,
                  "type " + std::to_string(i) + " is unreachable from type 0");

  // Every edge of the type graph, not just the tree, must agree.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (counts[i][j] == 0) continue;
      if (*rel[i] * Rational::make(counts[i][j], 1) != *rel[j] * Rational::make(counts[j][i], 1))
        throw Error(ErrorCode::kInconsistentCounts,
                    "no proportion vector satisfies p_i n_i(j) = p_j n_j(i) for (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
    }

  Rational total{0, 1};
  for (const auto& r : rel) total = total + *r;

  TypeBlueprint bp;
  bp.counts_ = counts;
  for (const auto& r : rel) {
    bp.exact_.push_back(*r / total);
    bp.proportions_.push_back(bp.exact_.back().value());
  }
  return bp;
}

Graph::Graph(TypeBlueprint blueprint, std::vector<int> type_of,
             const std::vector<std::pair<int, int>>& edges)
    : blueprint_(std::move(blueprint)), type_of_(std::move(type_of)) {
  const int n = num_vertices();
  for (int t : type_of_)
    if (t < 0 || t >= blueprint_.n_types())
      throw Error(ErrorCode::kInvalidArgument, "vertex type out of range");

  edges_.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw Error(ErrorCode::kInvalidArgument, "edge endpoint out of range");
    edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges_.begin(), edges_.end());

  std::vector<int> deg(n, 0);
  for (auto [u, v] : edges_) {
    ++deg[u];
    ++deg[v];
  }
  offsets_.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
  adjacency_.resize(offsets_[n]);
  edge_ids_.resize(offsets_[n]);
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    auto [u, v] = edges_[e];
    adjacency_[fill[u]] = v;
    edge_ids_[fill[u]++] = e;
    adjacency_[fill[v]] = u;
    edge_ids_[fill[v]++] = e;
  }
  // Sort each neighbor list, carrying edge ids along.
  for (int v = 0; v < n; ++v) {
    std::vector<std::pair<int, int>> slot;
    for (int s = offsets_[v]; s < offsets_[v + 1]; ++s) slot.emplace_back(adjacency_[s], edge_ids_[s]);
    std::sort(slot.begin(), slot.end());
    for (int s = offsets_[v]; s < offsets_[v + 1]; ++s) {
      adjacency_[s] = slot[s - offsets_[v]].first;
      edge_ids_[s] = slot[s - offsets_[v]].second;
    }
  }

  type_sizes_.assign(blueprint_.n_types(), 0);
  for (int t : type_of_) ++type_sizes_[t];
}

// --- built-in families -----------------------------------------------------

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_size(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kSizeTooSmall, what);
}

Graph make_cycle(int n) {
  require_size(n >= 3, "cycle needs at least 3 vertices");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(family_blueprint(family::Cycle{n}), std::vector<int>(n, 0), edges);
}

// Vertices 0..n-1 have degree 4 (type 1); u_i = n + 2i and w_i = n + 2i + 1
// have degree 2 (type 0) and both join v_i to v_{i+1}.
Graph make_bipartite24(int n) {
  require_size(n >= 2, "bipartite (2,4) pattern needs n >= 2");
  std::vector<int> types(3 * n, 0);
  std::fill(types.begin(), types.begin() + n, 1);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    const int next = (i + 1) % n;
    for (int leaf : {n + 2 * i, n + 2 * i + 1}) {
      edges.emplace_back(i, leaf);
      edges.emplace_back(next, leaf);
    }
  }
  return Graph(family_blueprint(family::Bipartite24{n}), std::move(types), edges);
}

// Z_m x Z_n grid with parity types A=(even,even), B=(even,odd), C=(odd,even),
// D=(odd,odd); decorations A(x,y)-D(x+1,y+1) and C(x,y)-C(x+-2,y).
Graph make_decorated_grid(int m, int n) {
  if (m % 2 != 0 || n % 2 != 0)
    throw Error(ErrorCode::kOddGridDimension, "decorated grid needs even m and n");
  require_size(m >= 6 && n >= 4, "decorated grid needs m >= 6 and n >= 4");
  auto id = [&](int x, int y) { return ((x % m + m) % m) * n + ((y % n + n) % n); };
  std::vector<int> types(m * n);
  std::vector<std::pair<int, int>> edges;
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < n; ++y) {
      const int v = id(x, y);
      types[v] = 2 * (x % 2) + (y % 2);
      edges.emplace_back(v, id(x + 1, y));
      edges.emplace_back(v, id(x, y + 1));
      if (x % 2 == 0 && y % 2 == 0) edges.emplace_back(v, id(x + 1, y + 1));
      if (x % 2 == 1 && y % 2 == 0) edges.emplace_back(v, id(x + 2, y));
    }
  return Graph(family_blueprint(family::DecoratedGrid{m, n}), std::move(types), edges);
}

Graph make_torus(int side) {
  require_size(side >= 3, "torus needs side >= 3");
  auto id = [&](int x, int y) { return (x % side) * side + (y % side); };
  std::vector<std::pair<int, int>> edges;
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y) {
      edges.emplace_back(id(x, y), id(x + 1, y));
      edges.emplace_back(id(x, y), id(x, y + 1));
    }
  return Graph(family_blueprint(family::Torus2D{side}), std::vector<int>(side * side, 0), edges);
}

// Backbone 0..n-1 (type 0) on a cycle, leaf n+i (type 1) hanging off i.
Graph make_comb(int n) {
  require_size(n >= 3, "comb backbone needs n >= 3");
  std::vector<int> types(2 * n, 0);
  std::fill(types.begin() + n, types.end(), 1);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    edges.emplace_back(i, (i + 1) % n);
    edges.emplace_back(i, n + i);
  }
  return Graph(family_blueprint(family::Comb{n}), std::move(types), edges);
}

// Z_n x P_3, rows 0 and 2 are boundary (type 0), row 1 is the middle (type 1).
Graph make_strip3(int n) {
  require_size(n >= 3, "strip needs n >= 3");
  auto id = [&](int x, int row) { return row * n + (x % n); };
  std::vector<int> types(3 * n, 0);
  std::fill(types.begin() + n, types.begin() + 2 * n, 1);
  std::vector<std::pair<int, int>> edges;
  for (int x = 0; x < n; ++x) {
    for (int row = 0; row < 3; ++row) edges.emplace_back(id(x, row), id(x + 1, row));
    edges.emplace_back(id(x, 0), id(x, 1));
    edges.emplace_back(id(x, 1), id(x, 2));
  }
  return Graph(family_blueprint(family::Strip3{n}), std::move(types), edges);
}

}  // namespace

TypeBlueprint family_blueprint(const Family& fam) {
  return std::visit(
      Overloaded{
          [](const family::Cycle&) { return validate_blueprint({{2}}); },
          [](const family::Bipartite24&) { return validate_blueprint({{0, 2}, {4, 0}}); },
          [](const family::DecoratedGrid&) {
            return validate_blueprint({{0, 2, 2, 1}, {2, 0, 0, 2}, {2, 0, 2, 2}, {1, 2, 2, 0}});
          },
          [](const family::Torus2D&) { return validate_blueprint({{4}}); },
          [](const family::Comb&) { return validate_blueprint({{2, 1}, {1, 0}}); },
          [](const family::Strip3&) { return validate_blueprint({{2, 1}, {2, 2}}); },
      },
      fam);
}

Graph build_family(const Family& fam) {
  return std::visit(Overloaded{
                        [](const family::Cycle& f) { return make_cycle(f.n); },
                        [](const family::Bipartite24& f) { return make_bipartite24(f.n); },
                        [](const family::DecoratedGrid& f) { return make_decorated_grid(f.m, f.n); },
                        [](const family::Torus2D& f) { return make_torus(f.side); },
                        [](const family::Comb& f) { return make_comb(f.n); },
                        [](const family::Strip3& f) { return make_strip3(f.n); },
                    },
                    fam);
}

Family parse_family(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  auto arg = [&](std::size_t i) {
    if (i >= parts.size())
      throw Error(ErrorCode::kParseError, "graph family '" + text + "' is missing a size");
    try {
      std::size_t used = 0;
      const int v = std::stoi(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, "bad size '" + parts[i] + "' in '" + text + "'");
    }
  };
  auto expect_args = [&](std::size_t n) {
    if (parts.size() != n + 1)
      throw Error(ErrorCode::kParseError, "graph family '" + text + "' takes " +
                                               std::to_string(n) + " size argument(s)");
  };
  if (parts.empty()) throw Error(ErrorCode::kParseError, "empty graph family");
  const std::string& name = parts[0];
  if (name == "cycle") { expect_args(1); return family::Cycle{arg(1)}; }
  if (name == "bipartite24") { expect_args(1); return family::Bipartite24{arg(1)}; }
  if (name == "grid") { expect_args(2); return family::DecoratedGrid{arg(1), arg(2)}; }
  if (name == "torus") { expect_args(1); return family::Torus2D{arg(1)}; }
  if (name == "comb") { expect_args(1); return family::Comb{arg(1)}; }
  if (name == "strip3") { expect_args(1); return family::Strip3{arg(1)}; }
  throw Error(ErrorCode::kParseError, "unknown graph family '" + name + "'");
}

std::string family_name(const Family& fam) {
  return std::visit(
      Overloaded{
          [](const family::Cycle& f) { return "cycle:" + std::to_string(f.n); },
          [](const family::Bipartite24& f) { return "bipartite24:" + std::to_string(f.n); },
          [](const family::DecoratedGrid& f) {
            return "grid:" + std::to_string(f.m) + ":" + std::to_string(f.n);
          },
          [](const family::Torus2D& f) { return "torus:" + std::to_string(f.side); },
          [](const family::Comb& f) { return "comb:" + std::to_string(f.n); },
          [](const family::Strip3& f) { return "strip3:" + std::to_string(f.n); },
      },
      fam);
}

// --- configuration model ---------------------------------------------------

std::optional<std::vector<int>> feasible_type_sizes(const TypeBlueprint& bp, int target_size) {
  const int k = bp.n_types();
  std::vector<int> sizes(k);
  long total = 0;
  for (int i = 0; i < k; ++i) {
    const Rational& p = bp.proportions_exact()[i];
    // round(p * N) computed exactly: floor((2 p N + 1) / 2).
    const std::int64_t twice = 2 * p.num * target_size;
    sizes[i] = static_cast<int>((twice + p.den) / (2 * p.den));
    total += sizes[i];
  }
  if (total != target_size) return std::nullopt;
  for (int i = 0; i < k; ++i) {
    if (sizes[i] == 0) return std::nullopt;
    if ((static_cast<long>(sizes[i]) * bp.count(i, i)) % 2 != 0) return std::nullopt;
    for (int j = 0; j < k; ++j)
      if (static_cast<long>(sizes[i]) * bp.count(i, j) != static_cast<long>(sizes[j]) * bp.count(j, i))
        return std::nullopt;
    // A type-i vertex needs n_i(j) distinct type-j partners.
    for (int j = 0; j < k; ++j) {
      const int available = (i == j) ? sizes[j] - 1 : sizes[j];
      if (bp.count(i, j) > available) return std::nullopt;
    }
  }
  return sizes;
}

namespace {

std::uint64_t edge_key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

// Matches `left` stubs with `right` stubs (or `left` with itself when `right`
// is null), rejecting partners that would create a loop or a repeated edge.
bool match_stubs(std::vector<int> left, std::vector<int>* right, Rng& rng, int tries_per_stub,
                 std::unordered_set<std::uint64_t>& seen,
                 std::vector<std::pair<int, int>>& edges) {
  const bool self = (right == nullptr);
  std::vector<int>& pool = self ? left : *right;
  if (!self && left.size() != pool.size()) return false;
  // Shuffle once, then pop stubs from the back.
  for (std::size_t i = left.size(); i > 1; --i) std::swap(left[i - 1], left[rng.below(i)]);
  while (!left.empty()) {
    const int u = left.back();
    left.pop_back();
    if (pool.empty()) return false;
    bool placed = false;
    for (int attempt = 0; attempt < tries_per_stub && !pool.empty(); ++attempt) {
      const std::size_t idx = rng.below(pool.size());
      const int v = pool[idx];
      if (u == v || seen.count(edge_key(u, v))) continue;
      seen.insert(edge_key(u, v));
      edges.emplace_back(u, v);
      pool[idx] = pool.back();
      pool.pop_back();
      placed = true;
      break;
    }
    if (!placed) return false;
  }
  return true;
}

bool is_connected(const Graph& g) {
  const int n = g.num_vertices();
  if (n == 0) return true;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : g.neighbors(v))
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
  }
  return reached == n;
}

}  // namespace

ConfigModelResult build_configuration_model(const TypeBlueprint& bp, int target_size,
                                            std::uint64_t seed, const ConfigModelOptions& options) {
  const auto sizes = feasible_type_sizes(bp, target_size);
  if (!sizes)
    throw Error(ErrorCode::kInfeasibleSize,
                "no integer type counts of total " + std::to_string(target_size) +
                    " satisfy the blueprint's stub-parity conditions");
  const int k = bp.n_types();
  std::vector<int> types;
  std::vector<std::vector<int>> members(k);
  for (int i = 0; i < k; ++i)
    for (int c = 0; c < (*sizes)[i]; ++c) {
      members[i].push_back(static_cast<int>(types.size()));
      types.push_back(i);
    }

  auto stubs = [&](int i, int j) {
    std::vector<int> out;
    for (int v : members[i])
      for (int c = 0; c < bp.count(i, j); ++c) out.push_back(v);
    return out;
  };

  Rng rng(seed);
  for (int restart = 0; restart < options.max_restarts; ++restart) {
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<int, int>> edges;
    bool ok = true;
    for (int i = 0; i < k && ok; ++i)
      for (int j = i; j < k && ok; ++j) {
        if (bp.count(i, j) == 0) continue;
        if (i == j) {
          ok = match_stubs(stubs(i, i), nullptr, rng, options.tries_per_stub, seen, edges);
        } else {
          auto right = stubs(j, i);
          ok = match_stubs(stubs(i, j), &right, rng, options.tries_per_stub, seen, edges);
        }
      }
    if (!ok) continue;
    Graph g(bp, types, edges);
    const bool connected = is_connected(g);
    return {std::move(g), connected, restart};
  }
  throw Error(ErrorCode::kMatchingFailed, "no simple matching found within " +
                                              std::to_string(options.max_restarts) +
                                              " restarts");
}

// --- verification ----------------------------------------------------------

RealizationReport verify_realization(const Graph& g) {
  RealizationReport report;
  const TypeBlueprint& bp = g.blueprint();
  const int k = bp.n_types();
  const int n = g.num_vertices();

  std::vector<int> per_type(k);
  for (int v = 0; v < n && report.pass; ++v) {
    std::fill(per_type.begin(), per_type.end(), 0);
    auto nb = g.neighbors(v);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      const int u = nb[s];
      if (u == v || (s > 0 && nb[s - 1] == u)) {
        report.pass = false;
        report.symmetric = false;
        report.offending_vertex = v;
        report.message = "vertex " + std::to_string(v) + " has a loop or repeated neighbor";
        break;
      }
      ++per_type[g.type_of(u)];
    }
    if (!report.pass) break;
    const int t = g.type_of(v);
    for (int j = 0; j < k; ++j)
      if (per_type[j] != bp.count(t, j)) {
        report.pass = false;
        report.offending_vertex = v;
        report.message = "vertex " + std::to_string(v) + " (type " + std::to_string(t) + ") has " +
                         std::to_string(per_type[j]) + " neighbors of type " + std::to_string(j) +
                         ", blueprint says " + std::to_string(bp.count(t, j));
        break;
      }
  }

  for (int i = 0; i < k; ++i)
    report.empirical_proportions.push_back(n == 0 ? 0.0 : g.type_sizes()[i] / static_cast<double>(n));
  if (report.pass) {
    for (int i = 0; i < k; ++i)
      if (std::abs(report.empirical_proportions[i] - bp.proportion(i)) > 1.0 / n + 1e-12) {
        report.pass = false;
        report.message = "type " + std::to_string(i) + " proportion " +
                         std::to_string(report.empirical_proportions[i]) + " differs from " +
                         std::to_string(bp.proportion(i));
        break;
      }
  }
  report.connected = is_connected(g);
  if (report.pass) report.message = "ok";
  return report;
}

// --- growth margin ---------------------------------------------------------

namespace {
bool less_than(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}
}  // namespace

GrowthTable::GrowthTable(std::vector<std::int64_t> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty growth table");
  if (values_[0] < 1) throw Error(ErrorCode::kInvalidArgument, "growth table needs f(0) >= 1");
  for (std::size_t r = 1; r < values_.size(); ++r)
    if (values_[r] < values_[r - 1])
      throw Error(ErrorCode::kInvalidArgument, "growth table must be non-decreasing");
  // Suffix suprema, so every M(N) query is O(1).
  tail_.assign(values_.size() + 1, Rational{0, 1});
  for (std::size_t m = values_.size() - 1; m >= 1; --m) {
    const Rational delta = Rational::make(values_[m] - values_[m - 1], values_[m - 1]);
    tail_[m] = less_than(tail_[m + 1], delta) ? delta : tail_[m + 1];
  }
  tail_[0] = tail_.size() > 1 ? tail_[1] : Rational{0, 1};
}

Rational tail_growth_rate(const GrowthTable& growth, std::int64_t n_start) {
  return growth.tail_sup(static_cast<std::size_t>(std::max<std::int64_t>(n_start, 0)));
}

std::int64_t boundary_margin_g(const GrowthTable& growth, std::int64_t n) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "g(n) is defined for n >= 2");
  if (static_cast<std::int64_t>(growth.max_index()) < n)
    throw Error(ErrorCode::kTableTooShort, "growth table ends at " +
                                               std::to_string(growth.max_index()) +
                                               ", need index " + std::to_string(n));
  const std::int64_t half = n / 2;
  const Rational m = tail_growth_rate(growth, half);
  std::int64_t bound = half;
  if (m.num > 0) {
    // Largest q with q^2 <= 1/M, i.e. q^2 * num <= den, computed exactly.
    auto q = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(m.den) / m.num));
    auto fits = [&](std::int64_t c) {
      return static_cast<__int128>(c) * c * m.num <= static_cast<__int128>(m.den);
    };
    while (q > 0 && !fits(q)) --q;
    while (fits(q + 1)) ++q;
    bound = std::min(bound, q);
  }
  // M >= 1 only happens for tiny n; the ratio bound is then trivial and the
  // margin stays positive.
  return std::max<std::int64_t>(1, bound);
}

}  // namespace rumorlab
