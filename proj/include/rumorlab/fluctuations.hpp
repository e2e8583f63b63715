#pragma once

// Gaussian fluctuations around the mean-field limit.
//
// Noise families, per type k and ordered type pair (k, j) with n_k(j) > 0:
//   Y0_k, Z0_k    initial spreaders leaving at their own stifling times
//                 (Z0_k = -Y0_k pathwise)
//   Ykj, Zkj      conversions of k-ignorants by j-spreaders, split by
//                 whether the new spreader is still active
//   Bkj           contact stiflings of k-spreaders by j-neighbours
// Different families and different (k, j) are independent.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "rumorlab/engine.hpp"
#include "rumorlab/meanfield.hpp"
#include "rumorlab/rng.hpp"

namespace rumorlab {

/// How the (Ykj, Zkj) block is evaluated.
///  kTable: the closed forms with every kernel at t^r; the joint block is
///          in general not positive semidefinite and cannot be sampled.
///  kShotNoise: covariance of the compensated marked point process that
///          the noises are limits of; PSD by construction.
enum class CovarianceMode { kTable, kShotNoise };

enum class NoiseKind { kY0, kZ0, kYkj, kZkj, kBkj };

struct NoiseId {
  NoiseKind kind;
  int k;
  int j = -1;  ///< unused for Y0/Z0
};

struct NoiseCovariance {
  CovarianceMode mode = CovarianceMode::kShotNoise;
  std::vector<double> times;
  /// Position of each time on the mean-field grid.
  std::vector<std::size_t> grid_index;
  int n_types = 0;
  double lambda = 0.0;

  struct InitialBlock {
    int k;
    double y0;            ///< Ybar_k(0)
    Eigen::MatrixXd yy;   ///< Cov[Y0(t_a), Y0(t_b)]; zz is identical
    Eigen::MatrixXd yz;   ///< Cov[Y0(t_a), Z0(t_b)] = -yy
  };
  struct PairBlock {
    int k, j;
    double c;             ///< n_k(j) / p_j
    Eigen::MatrixXd yy, zz, yz, bb;
  };
  std::vector<InitialBlock> initial;
  std::vector<PairBlock> pairs;

  /// Covariance between two noises at time indices a, b (0 if independent).
  double cov(const NoiseId& x, std::size_t a, const NoiseId& y, std::size_t b) const;
  /// Index into `pairs`, or -1 when n_k(j) = 0.
  int pair_index(int k, int j) const;
};

/// Throws Error{TimesOutsideGrid} if a time is not a node of `sol`.
NoiseCovariance eval_noise_covariance(const MeanFieldSolution& sol, const TypeBlueprint& bp,
                                      double lambda, const StiflingLaw& law,
                                      const std::vector<double>& times,
                                      CovarianceMode mode = CovarianceMode::kShotNoise);

struct NoiseCheckEntry {
  double t, r;
  double empirical_yy, formula_yy, se_yy;
  double empirical_yz, formula_yz, se_yz;
  double z_yy() const;
  double z_yz() const;
};

struct NoiseCheckReport {
  std::int64_t n_spreaders = 0;
  std::vector<NoiseCheckEntry> entries;
  double max_abs_z = 0.0;
};

/// Monte Carlo of the initial-spreader empirical process
///   Y0(t) = N^{-1/2} sum_i (1{t < eta_i} - F^c(t)),  Z0 = -Y0,
/// against the closed-form covariance, for each (t, r) pair.
NoiseCheckReport empirical_noise_check(const StiflingLaw& law, double y0, std::int64_t n_particles,
                                       int n_replicas,
                                       const std::vector<std::pair<double, double>>& time_pairs,
                                       std::uint64_t seed);

/// One realization of every noise on the covariance times.
struct NoiseRealization {
  std::vector<double> times;
  int n_types = 0;
  std::vector<std::vector<double>> y0, z0;  ///< [k][time]
  struct PairPath {
    int k, j;
    std::vector<double> y, z, b;
  };
  std::vector<PairPath> pairs;

  /// Multiplies every path by c.
  void scale(double c);
};

/// Factorizes every independent block once; draws are then cheap.
class NoiseSampler {
 public:
  /// Throws Error{NotPsdAfterRidge} naming the block and its most negative
  /// eigenvalue when a block needs more than a 1e-12 * trace ridge.
  explicit NoiseSampler(const NoiseCovariance& cov);
  NoiseRealization draw(Rng& rng) const;
  /// Largest ridge applied to any block.
  double max_ridge() const { return max_ridge_; }

 private:
  const NoiseCovariance* cov_;
  std::vector<Eigen::MatrixXd> initial_root_, pair_root_, b_root_;
  double max_ridge_ = 0.0;
};

NoiseRealization sample_limit_noises(const NoiseCovariance& cov, std::uint64_t seed);

struct FluctuationSample {
  std::vector<double> times;
  int n_types = 0;
  std::vector<double> x, y, z;  ///< [m * n_types + k]
  NoiseRealization noises;

  double X(std::size_t m, int k) const { return x[m * n_types + k]; }
  double Y(std::size_t m, int k) const { return y[m * n_types + k]; }
  double Z(std::size_t m, int k) const { return z[m * n_types + k]; }
};

struct InitialFluctuation {
  std::vector<double> y, z;  ///< per type; X(0) = -Y(0) - Z(0)
  static InitialFluctuation zero(int n_types);
};

/// Linear Volterra system for the rescaled fluctuations. The noise times
/// must be the first nodes of the mean-field grid.
/// Throws Error{GridMismatch | FixedPointDiverged}.
FluctuationSample solve_fclt(const NoiseRealization& noises, const InitialFluctuation& initial,
                             const TypeBlueprint& bp, double lambda, const StiflingLaw& law,
                             const MeanFieldSolution& sol);

enum class Centering { kMeanField, kEmpiricalMean };

struct EmpiricalFluctuations {
  Centering reference = Centering::kEmpiricalMean;
  std::vector<double> times;
  int n_types = 0;
  int n_replicas = 0;
  std::int64_t n_vertices = 0;
  /// sqrt(#V) (count/#V - ref) at [((r * T + g) * n_types + k) * 3 + s].
  std::vector<double> values;

  double at(int r, std::size_t g, int k, int s) const {
    return values[((r * times.size() + g) * n_types + k) * 3 + s];
  }
  /// Summed over types.
  double total(int r, std::size_t g, int s) const;
  /// Replica values of the type-summed series at grid time index g.
  std::vector<double> column(std::size_t g, int s) const;
};

/// Throws Error{GridMismatch} when replicas disagree on grid or size, or
/// when a replica time is not a node of the mean-field reference.
EmpiricalFluctuations center_and_rescale(const std::vector<Trajectory>& replicas,
                                         const MeanFieldSolution* reference = nullptr);

struct MomentStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  /// Standard errors under normality.
  double se_skewness = 0.0;
  double se_kurtosis = 0.0;
  /// Zero variance: skewness and kurtosis are undefined (NaN).
  bool degenerate = false;
  /// Fewer than 30 samples.
  bool too_few = false;
};

MomentStats moment_stats(const std::vector<double>& samples);

struct VarianceRatio {
  double ratio = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double var_small = 0.0;
  double var_large = 0.0;
  bool degenerate = false;
  bool too_few = false;
};

/// Var(small) / Var(large) with a 95% percentile bootstrap interval.
VarianceRatio variance_scaling_check(const std::vector<double>& small_size,
                                     const std::vector<double>& large_size, std::uint64_t seed,
                                     int n_boot = 2000);

/// Replica densities (count / #V, summed over types) at time t.
std::vector<double> densities_at(const std::vector<Trajectory>& replicas, double t, int state);

}  // namespace rumorlab
