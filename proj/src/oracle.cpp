#include "rumorlab/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "rumorlab/error.hpp"

namespace rumorlab {

namespace {

struct Transition {
  int target;
  double rate;
};

// Advances the distribution `pi` by time `t` under the uniformized chain.
void propagate(std::vector<double>& pi, const std::vector<std::vector<Transition>>& out,
               const std::vector<double>& exit, double uniform_rate, double t, double tolerance) {
  if (t <= 0 || uniform_rate <= 0) return;
  // Keep each chunk's Poisson mean moderate so exp(-mean) never underflows.
  const int chunks = static_cast<int>(std::ceil(uniform_rate * t / 50.0));
  const double h = t / chunks;
  const double mean = uniform_rate * h;
  const std::size_t n = pi.size();
  std::vector<double> term(n), next(n), acc(n);
  for (int c = 0; c < chunks; ++c) {
    term = pi;
    double weight = std::exp(-mean);
    double covered = weight;
    for (std::size_t s = 0; s < n; ++s) acc[s] = weight * term[s];
    for (int k = 1; 1.0 - covered > tolerance / chunks; ++k) {
      // term <- term * P with P = I + Q / uniform_rate.
      for (std::size_t s = 0; s < n; ++s) next[s] = term[s] * (1.0 - exit[s] / uniform_rate);
      for (std::size_t s = 0; s < n; ++s) {
        if (term[s] == 0.0) continue;
        for (const auto& tr : out[s]) next[tr.target] += term[s] * tr.rate / uniform_rate;
      }
      term.swap(next);
      weight *= mean / k;
      covered += weight;
      for (std::size_t s = 0; s < n; ++s) acc[s] += weight * term[s];
      if (k > 100000) throw Error(ErrorCode::kInvalidArgument, "uniformization did not converge");
    }
    pi = acc;
  }
}

}  // namespace

OracleResult exact_oracle(const Graph& graph, double lambda, const StiflingLaw& law,
                          std::span<const VertexState> initial, std::span<const double> times,
                          YYRule yy_rule, double tolerance) {
  const int nv = graph.num_vertices();
  if (nv > kOracleMaxVertices)
    throw Error(ErrorCode::kTooManyVertices,
                std::to_string(nv) + " vertices; the oracle handles at most " +
                    std::to_string(kOracleMaxVertices));
  if (!law.is_exponential())
    throw Error(ErrorCode::kNonExponentialLaw, "the oracle needs Exponential stifling, got " + law.describe());
  if (static_cast<int>(initial.size()) != nv)
    throw Error(ErrorCode::kInvalidArgument, "initial state needs one entry per vertex");
  if (!(lambda > 0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be > 0");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0 || (i > 0 && times[i] < times[i - 1]))
      throw Error(ErrorCode::kInvalidArgument, "times must be non-negative and sorted");
  const double mu = std::get<law::Exponential>(law.variant()).rate;

  std::vector<int> pow3(nv + 1, 1);
  for (int i = 1; i <= nv; ++i) pow3[i] = pow3[i - 1] * 3;
  const int n_states = pow3[nv];
  auto digit = [&](int s, int v) { return (s / pow3[v]) % 3; };
  // Moves vertex v from state `from` to `to` in code s.
  auto moved = [&](int s, int v, int from, int to) { return s + (to - from) * pow3[v]; };

  constexpr int X = 0, Y = 1, Z = 2;
  std::vector<std::vector<Transition>> out(n_states);
  std::vector<double> exit(n_states, 0.0);
  for (int s = 0; s < n_states; ++s) {
    auto& tr = out[s];
    for (const auto& [u, v] : graph.edges()) {
      const int a = digit(s, u), b = digit(s, v);
      if ((a == X && b == Y) || (a == Y && b == X)) {
        const int ign = (a == X) ? u : v;
        tr.push_back({moved(s, ign, X, Y), lambda});
      } else if ((a == Y && b == Z) || (a == Z && b == Y)) {
        const int spr = (a == Y) ? u : v;
        tr.push_back({moved(s, spr, Y, Z), lambda});
      } else if (a == Y && b == Y) {
        if (yy_rule == YYRule::kBothStifle) {
          tr.push_back({moved(moved(s, u, Y, Z), v, Y, Z), lambda});
        } else {
          tr.push_back({moved(s, u, Y, Z), lambda / 2});
          tr.push_back({moved(s, v, Y, Z), lambda / 2});
        }
      }
    }
    for (int v = 0; v < nv; ++v)
      if (digit(s, v) == Y) tr.push_back({moved(s, v, Y, Z), mu});
    for (const auto& t : tr) exit[s] += t.rate;
  }
  const double uniform_rate = *std::max_element(exit.begin(), exit.end());

  int start = 0;
  for (int v = 0; v < nv; ++v) start += static_cast<int>(initial[v]) * pow3[v];
  std::vector<double> pi(n_states, 0.0);
  pi[start] = 1.0;

  OracleResult result;
  result.n_types = graph.blueprint().n_types();
  result.times.assign(times.begin(), times.end());
  double now = 0.0;
  for (double t : times) {
    propagate(pi, out, exit, uniform_rate, t - now, tolerance);
    now = t;
    std::vector<double> e(result.n_types * 3, 0.0);
    for (int s = 0; s < n_states; ++s) {
      if (pi[s] == 0.0) continue;
      for (int v = 0; v < nv; ++v) e[graph.type_of(v) * 3 + digit(s, v)] += pi[s];
    }
    result.expected.insert(result.expected.end(), e.begin(), e.end());
  }
  return result;
}

}  // namespace rumorlab
