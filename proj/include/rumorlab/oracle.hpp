#pragma once

// Exact expectations for tiny graphs. With Exponential(mu) stifling the
// dynamics is a finite CTMC on {X, Y, Z}^V; its transient law is computed
// by uniformization.

#include <span>
#include <vector>

#include "rumorlab/engine.hpp"
#include "rumorlab/qtgraph.hpp"

namespace rumorlab {

inline constexpr int kOracleMaxVertices = 10;

struct OracleResult {
  std::vector<double> times;
  int n_types = 0;
  /// expected[(g * n_types + k) * 3 + s], same layout as Trajectory::counts.
  std::vector<double> expected;

  double at(std::size_t g, int k, int s) const { return expected[(g * n_types + k) * 3 + s]; }
};

/// `times` must be non-negative and non-decreasing. Truncation error of each
/// uniformization series is below `tolerance` in total variation.
/// Throws Error{TooManyVertices | NonExponentialLaw | InvalidArgument}.
OracleResult exact_oracle(const Graph& graph, double lambda, const StiflingLaw& law,
                          std::span<const VertexState> initial, std::span<const double> times,
                          YYRule yy_rule = YYRule::kBothStifle, double tolerance = 1e-10);

}  // namespace rumorlab
