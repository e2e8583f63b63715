#pragma once

// Deterministic large-graph limit. Densities are relative to #V, so type-k
// values live in [0, p_k]. With c_kj = n_k(j) / p_j,
//   a_k = lambda * X_k * sum_j c_kj Y_j            (ignorant conversions)
//   kappa_k = lambda * sum_j c_kj (p_j - X_j)      (contact hazard of a spreader)
//   b_k = Y_k * kappa_k                            (contact stiflings)
//
// FllnForm::kSeparate is the integral system with a memoryless contact drain:
//   Y_k(t) = Y_k(0) F^c(t) + int_0^t F^c(t-s) a_k(s) ds - int_0^t b_k(s) ds
//   Z_k(t) = Z_k(0) + Y_k(0) F(t) + int_0^t F(t-s) a_k(s) ds + int_0^t b_k(s) ds
// A spreader silenced by contact is still moved to Z a second time when its
// timer rings, so Y_k can turn negative once both mechanisms are active.
//
// FllnForm::kCompeting lets the timer and contact stifling compete:
//   Y_k(t) = Y_k(0) F^c(t) S_k(0,t) + int_0^t F^c(t-s) S_k(s,t) a_k(s) ds
//   X_k(t) = X_k(0) - int_0^t a_k(s) ds,   S_k(s,t) = exp(-int_s^t kappa_k)
// Both forms reduce to the same ODE under the Never law. In both,
// X_k + Y_k + Z_k = p_k holds by construction.

#include <vector>

#include "rumorlab/qtgraph.hpp"
#include "rumorlab/stifling.hpp"

namespace rumorlab {

enum class FllnForm { kCompeting, kSeparate };

struct MeanFieldProblem {
  TypeBlueprint blueprint;
  double lambda = 1.0;
  StiflingLaw law = law::Never{};
  /// Initial spreader and stifler densities per type (relative to #V).
  std::vector<double> spreader0;
  std::vector<double> stifler0;
  double t_max = 20.0;
  double dt = 0.01;
  FllnForm form = FllnForm::kCompeting;

  /// Initial densities given as fractions within each type (y_k, z_k).
  static MeanFieldProblem from_fractions(TypeBlueprint bp, double lambda, StiflingLaw law,
                                         const std::vector<double>& spreader_fraction,
                                         const std::vector<double>& stifler_fraction,
                                         double t_max, double dt);
};

struct MeanFieldSolution {
  std::vector<double> times;
  int n_types = 0;
  std::vector<double> proportions;
  /// Series indexed [m * n_types + k].
  std::vector<double> x, y, z;

  double X(std::size_t m, int k) const { return x[m * n_types + k]; }
  double Y(std::size_t m, int k) const { return y[m * n_types + k]; }
  double Z(std::size_t m, int k) const { return z[m * n_types + k]; }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  std::size_t steps() const { return times.size() - 1; }
  /// Grid index of time t; throws Error{TimesOutsideGrid} when t is not a node.
  std::size_t index_of(double t) const;
};

void validate_problem(const MeanFieldProblem& problem);

struct FixedPointOptions {
  int max_iterations = 50;
  double tolerance = 1e-12;
};

/// Trapezoidal product integration with a fixed-point solve for the implicit
/// endpoint at each step. Throws Error{FixedPointDiverged | InvalidArgument}.
MeanFieldSolution solve_flln(const MeanFieldProblem& problem, const FixedPointOptions& options = {});

/// Classic RK4 on the differentiated system; only valid for the Never law.
MeanFieldSolution classic_mt_ode(const MeanFieldProblem& problem);

/// Largest |difference| over all series on the nodes of the coarser grid.
/// The finer grid must refine the coarser one by an integer factor.
double sup_distance(const MeanFieldSolution& a, const MeanFieldSolution& b);

struct ConvergenceReport {
  std::vector<double> dts;
  /// Sup error of each dt against the finest dt (last entry is 0).
  std::vector<double> errors;
  /// Sup distance between consecutive refinements.
  std::vector<double> successive_differences;
  /// Orders from consecutive-difference ratios.
  std::vector<double> pairwise_orders;
  /// Order p solving (h_i^p - h_f^p) / (h_{i+1}^p - h_f^p) = e_i / e_{i+1}
  /// for the finest usable pair.
  double order = 0.0;
  bool degenerate = false;
};

enum class Solver { kVolterra, kClassicOde };

/// dts must hold >= 3 values in geometric progression (largest first).
ConvergenceReport convergence_order(const MeanFieldProblem& problem, const std::vector<double>& dts,
                                    Solver solver = Solver::kVolterra);

}  // namespace rumorlab
