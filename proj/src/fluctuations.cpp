#include "rumorlab/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rumorlab/error.hpp"

namespace rumorlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mean-field values with node 0 replaced by its right limit, which is what
// the integrands see when F has an atom at 0.
struct MeanPath {
  int n;
  std::vector<double> x, y;
  double X(std::size_t i, int k) const { return x[i * n + k]; }
  double Y(std::size_t i, int k) const { return y[i * n + k]; }
};

MeanPath right_limited(const MeanFieldSolution& sol, const StiflingLaw& law, std::size_t nodes) {
  MeanPath mp{sol.n_types, {}, {}};
  mp.x.assign(sol.x.begin(), sol.x.begin() + nodes * sol.n_types);
  mp.y.assign(sol.y.begin(), sol.y.begin() + nodes * sol.n_types);
  for (int k = 0; k < sol.n_types; ++k) mp.y[k] *= law.survival(0.0);
  return mp;
}

// h * (f(0)/2 + f(1) + ... + f(m-1) + f(m)/2).
template <class Fn>
double trapezoid(std::size_t m, double h, Fn&& f) {
  if (m == 0) return 0.0;
  double s = 0.5 * (f(0) + f(m));
  for (std::size_t i = 1; i < m; ++i) s += f(i);
  return h * s;
}

}  // namespace

int NoiseCovariance::pair_index(int k, int j) const {
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (pairs[p].k == k && pairs[p].j == j) return static_cast<int>(p);
  return -1;
}

double NoiseCovariance::cov(const NoiseId& x, std::size_t a, const NoiseId& y, std::size_t b) const {
  const bool x_init = x.kind == NoiseKind::kY0 || x.kind == NoiseKind::kZ0;
  const bool y_init = y.kind == NoiseKind::kY0 || y.kind == NoiseKind::kZ0;
  if (x_init != y_init || x.k != y.k) return 0.0;
  if (x_init) {
    const InitialBlock& blk = initial.at(x.k);
    if (x.kind == y.kind) return blk.yy(a, b);
    return x.kind == NoiseKind::kY0 ? blk.yz(a, b) : blk.yz(b, a);
  }
  if (x.j != y.j) return 0.0;
  const int p = pair_index(x.k, x.j);
  if (p < 0) return 0.0;
  const PairBlock& blk = pairs[p];
  auto is = [](const NoiseId& id, NoiseKind kind) { return id.kind == kind; };
  if (is(x, NoiseKind::kBkj) || is(y, NoiseKind::kBkj))
    return is(x, NoiseKind::kBkj) && is(y, NoiseKind::kBkj) ? blk.bb(a, b) : 0.0;
  if (x.kind == y.kind) return x.kind == NoiseKind::kYkj ? blk.yy(a, b) : blk.zz(a, b);
  return x.kind == NoiseKind::kYkj ? blk.yz(a, b) : blk.yz(b, a);
}

NoiseCovariance eval_noise_covariance(const MeanFieldSolution& sol, const TypeBlueprint& bp,
                                      double lambda, const StiflingLaw& law,
                                      const std::vector<double>& times, CovarianceMode mode) {
  const int n = bp.n_types();
  if (sol.n_types != n) throw Error(ErrorCode::kGridMismatch, "solution and blueprint disagree on types");
  NoiseCovariance cov;
  cov.mode = mode;
  cov.times = times;
  cov.n_types = n;
  cov.lambda = lambda;
  for (double t : times) cov.grid_index.push_back(sol.index_of(t));

  const std::size_t T = times.size();
  const std::size_t last = T ? *std::max_element(cov.grid_index.begin(), cov.grid_index.end()) : 0;
  const double h = sol.dt();
  std::vector<double> F(last + 1), S(last + 1);
  for (std::size_t i = 0; i <= last; ++i) {
    F[i] = law.cdf(i * h);
    S[i] = law.survival(i * h);
  }
  const MeanPath mp = right_limited(sol, law, last + 1);

  for (int k = 0; k < n; ++k) {
    NoiseCovariance::InitialBlock blk{k, sol.Y(0, k), Eigen::MatrixXd(T, T), Eigen::MatrixXd(T, T)};
    for (std::size_t a = 0; a < T; ++a)
      for (std::size_t b = 0; b < T; ++b) {
        const std::size_t lo = std::min(cov.grid_index[a], cov.grid_index[b]);
        const std::size_t hi = std::max(cov.grid_index[a], cov.grid_index[b]);
        blk.yy(a, b) = blk.y0 * F[lo] * (1.0 - F[hi]);
        blk.yz(a, b) = -blk.y0 * F[lo] * S[hi];
      }
    cov.initial.push_back(std::move(blk));
  }

  std::vector<double> conv(last + 1), drain(last + 1);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      if (bp.count(k, j) == 0) continue;
      const double c = bp.coupling(k, j);
      for (std::size_t i = 0; i <= last; ++i) {
        conv[i] = lambda * c * mp.X(i, k) * mp.Y(i, j);
        drain[i] = std::max(0.0, lambda * c * mp.Y(i, k) * (bp.proportion(j) - mp.X(i, j)));
      }
      NoiseCovariance::PairBlock blk{k, j, c, Eigen::MatrixXd(T, T), Eigen::MatrixXd(T, T),
                                     Eigen::MatrixXd(T, T), Eigen::MatrixXd(T, T)};
      for (std::size_t a = 0; a < T; ++a)
        for (std::size_t b = 0; b < T; ++b) {
          const std::size_t ia = cov.grid_index[a], ib = cov.grid_index[b];
          const std::size_t lo = std::min(ia, ib), hi = std::max(ia, ib);
          blk.zz(a, b) = trapezoid(lo, h, [&](std::size_t i) { return conv[i] * F[lo - i]; });
          blk.bb(a, b) = trapezoid(lo, h, [&](std::size_t i) { return drain[i]; });
          if (mode == CovarianceMode::kTable) {
            blk.yy(a, b) = trapezoid(lo, h, [&](std::size_t i) { return conv[i] * S[lo - i]; });
            blk.yz(a, b) = -blk.yy(a, b);
          } else {
            blk.yy(a, b) = trapezoid(lo, h, [&](std::size_t i) { return conv[i] * S[hi - i]; });
            // A conversion at s is active at t_a and stifled by t_b.
            blk.yz(a, b) = ia < ib ? trapezoid(ia, h, [&](std::size_t i) {
              return conv[i] * (F[ib - i] - F[ia - i]);
            })
                                   : 0.0;
          }
        }
      cov.pairs.push_back(std::move(blk));
    }
  return cov;
}

double NoiseCheckEntry::z_yy() const {
  if (se_yy > 0) return (empirical_yy - formula_yy) / se_yy;
  return std::abs(empirical_yy - formula_yy) <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
}

double NoiseCheckEntry::z_yz() const {
  if (se_yz > 0) return (empirical_yz - formula_yz) / se_yz;
  return std::abs(empirical_yz - formula_yz) <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
}

NoiseCheckReport empirical_noise_check(const StiflingLaw& law, double y0, std::int64_t n_particles,
                                       int n_replicas,
                                       const std::vector<std::pair<double, double>>& time_pairs,
                                       std::uint64_t seed) {
  if (n_particles <= 0 || n_replicas < 2 || !(y0 >= 0 && y0 <= 1))
    throw Error(ErrorCode::kInvalidArgument, "need particles > 0, replicas >= 2, y0 in [0,1]");
  NoiseCheckReport rep;
  rep.n_spreaders = std::llround(y0 * static_cast<double>(n_particles));
  const double y0_eff = static_cast<double>(rep.n_spreaders) / static_cast<double>(n_particles);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_particles));

  std::vector<double> ts;
  for (auto [t, r] : time_pairs) {
    ts.push_back(t);
    ts.push_back(r);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  auto slot = [&](double t) { return std::lower_bound(ts.begin(), ts.end(), t) - ts.begin(); };

  // y[r][i], z[r][i]: replica r at time ts[i].
  std::vector<std::vector<double>> ys(n_replicas, std::vector<double>(ts.size()));
  std::vector<std::vector<double>> zs = ys;
  Rng rng(seed);
  std::vector<std::int64_t> active(ts.size()), gone(ts.size());
  for (int r = 0; r < n_replicas; ++r) {
    std::fill(active.begin(), active.end(), 0);
    std::fill(gone.begin(), gone.end(), 0);
    for (std::int64_t i = 0; i < rep.n_spreaders; ++i) {
      const double eta = law.sample(rng);
      for (std::size_t s = 0; s < ts.size(); ++s) (ts[s] < eta ? active[s] : gone[s]) += 1;
    }
    for (std::size_t s = 0; s < ts.size(); ++s) {
      const double m = static_cast<double>(rep.n_spreaders);
      ys[r][s] = scale * (static_cast<double>(active[s]) - m * law.survival(ts[s]));
      zs[r][s] = scale * (static_cast<double>(gone[s]) - m * law.cdf(ts[s]));
    }
  }

  auto cov_stats = [&](const std::vector<std::vector<double>>& u, std::size_t a,
                       const std::vector<std::vector<double>>& v, std::size_t b) {
    double mu = 0.0, mv = 0.0;
    for (int r = 0; r < n_replicas; ++r) {
      mu += u[r][a];
      mv += v[r][b];
    }
    mu /= n_replicas;
    mv /= n_replicas;
    std::vector<double> prod(n_replicas);
    double sum = 0.0;
    for (int r = 0; r < n_replicas; ++r) {
      prod[r] = (u[r][a] - mu) * (v[r][b] - mv);
      sum += prod[r];
    }
    const double mean_prod = sum / n_replicas;
    double ss = 0.0;
    for (double p : prod) ss += (p - mean_prod) * (p - mean_prod);
    const double se = std::sqrt(ss / (n_replicas - 1) / n_replicas);
    return std::pair{sum / (n_replicas - 1), se};
  };

  for (auto [t, r] : time_pairs) {
    const auto a = slot(t), b = slot(r);
    const double lo = std::min(t, r), hi = std::max(t, r);
    NoiseCheckEntry e{t, r, 0, 0, 0, 0, 0, 0};
    std::tie(e.empirical_yy, e.se_yy) = cov_stats(ys, a, ys, b);
    std::tie(e.empirical_yz, e.se_yz) = cov_stats(ys, a, zs, b);
    e.formula_yy = y0_eff * law.cdf(lo) * (1.0 - law.cdf(hi));
    e.formula_yz = -y0_eff * law.cdf(lo) * law.survival(hi);
    rep.max_abs_z = std::max({rep.max_abs_z, std::abs(e.z_yy()), std::abs(e.z_yz())});
    rep.entries.push_back(e);
  }
  return rep;
}

void NoiseRealization::scale(double c) {
  for (auto& v : y0)
    for (double& x : v) x *= c;
  for (auto& v : z0)
    for (double& x : v) x *= c;
  for (auto& p : pairs)
    for (auto* v : {&p.y, &p.z, &p.b})
      for (double& x : *v) x *= c;
}

namespace {

Eigen::MatrixXd psd_root(const Eigen::MatrixXd& m, const std::string& name, double& max_ridge) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  const double ridge = 1e-12 * std::max(0.0, sym.trace());
  if (sym.size() == 0 || sym.cwiseAbs().maxCoeff() == 0.0)
    return Eigen::MatrixXd::Zero(sym.rows(), sym.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double lowest = ev.minCoeff();
  if (lowest < -ridge) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "block " << name << " has eigenvalue " << lowest << " below the ridge " << ridge;
    throw Error(ErrorCode::kNotPsdAfterRidge, msg.str());
  }
  max_ridge = std::max(max_ridge, ridge);
  const Eigen::VectorXd root = (ev.array() + ridge).max(0.0).sqrt().matrix();
  return eig.eigenvectors() * root.asDiagonal();
}

Eigen::MatrixXd joint(const Eigen::MatrixXd& aa, const Eigen::MatrixXd& ab, const Eigen::MatrixXd& bb) {
  const Eigen::Index T = aa.rows();
  Eigen::MatrixXd m(2 * T, 2 * T);
  m << aa, ab, ab.transpose(), bb;
  return m;
}

std::vector<double> draw_from(const Eigen::MatrixXd& root, Rng& rng) {
  Eigen::VectorXd z(root.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd x = root * z;
  return {x.data(), x.data() + x.size()};
}

}  // namespace

NoiseSampler::NoiseSampler(const NoiseCovariance& cov) : cov_(&cov) {
  for (const auto& blk : cov.initial)
    initial_root_.push_back(
        psd_root(joint(blk.yy, blk.yz, blk.yy), "initial[" + std::to_string(blk.k) + "]", max_ridge_));
  for (const auto& blk : cov.pairs) {
    const std::string tag = "[" + std::to_string(blk.k) + "," + std::to_string(blk.j) + "]";
    pair_root_.push_back(psd_root(joint(blk.yy, blk.yz, blk.zz), "conversion" + tag, max_ridge_));
    b_root_.push_back(psd_root(blk.bb, "contact" + tag, max_ridge_));
  }
}

NoiseRealization NoiseSampler::draw(Rng& rng) const {
  const std::size_t T = cov_->times.size();
  NoiseRealization out;
  out.times = cov_->times;
  out.n_types = cov_->n_types;
  for (const auto& root : initial_root_) {
    const std::vector<double> v = draw_from(root, rng);
    out.y0.emplace_back(v.begin(), v.begin() + T);
    out.z0.emplace_back(v.begin() + T, v.end());
  }
  for (std::size_t p = 0; p < pair_root_.size(); ++p) {
    const std::vector<double> v = draw_from(pair_root_[p], rng);
    NoiseRealization::PairPath path{cov_->pairs[p].k, cov_->pairs[p].j,
                                    {v.begin(), v.begin() + T}, {v.begin() + T, v.end()},
                                    draw_from(b_root_[p], rng)};
    out.pairs.push_back(std::move(path));
  }
  return out;
}

NoiseRealization sample_limit_noises(const NoiseCovariance& cov, std::uint64_t seed) {
  Rng rng(seed);
  return NoiseSampler(cov).draw(rng);
}

InitialFluctuation InitialFluctuation::zero(int n_types) {
  return {std::vector<double>(n_types, 0.0), std::vector<double>(n_types, 0.0)};
}

FluctuationSample solve_fclt(const NoiseRealization& noises, const InitialFluctuation& initial,
                             const TypeBlueprint& bp, double lambda, const StiflingLaw& law,
                             const MeanFieldSolution& sol) {
  const int n = bp.n_types();
  const std::size_t T = noises.times.size();
  if (sol.n_types != n || noises.n_types != n || T == 0 || T > sol.times.size())
    throw Error(ErrorCode::kGridMismatch, "noises, blueprint and solution disagree");
  for (std::size_t m = 0; m < T; ++m)
    if (std::abs(noises.times[m] - sol.times[m]) > 1e-9)
      throw Error(ErrorCode::kGridMismatch, "noise times must be the leading nodes of the solution grid");
  if (static_cast<int>(initial.y.size()) != n || static_cast<int>(initial.z.size()) != n)
    throw Error(ErrorCode::kInvalidArgument, "need one initial fluctuation per type");

  const double h = sol.dt();
  std::vector<double> F(T), S(T);
  for (std::size_t i = 0; i < T; ++i) {
    F[i] = law.cdf(i * h);
    S[i] = law.survival(i * h);
  }
  const MeanPath mp = right_limited(sol, law, T);

  // alpha = A u and beta = B u with u = (Yhat_1..n, Zhat_1..n).
  auto linear_maps = [&](std::size_t i, Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
    A.setZero(n, 2 * n);
    B.setZero(n, 2 * n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        if (bp.count(k, j) == 0) continue;
        const double lc = lambda * bp.coupling(k, j);
        A(k, k) -= lc * mp.Y(i, j);
        A(k, n + k) -= lc * mp.Y(i, j);
        A(k, j) += lc * mp.X(i, k);
        B(k, k) += lc * (bp.proportion(j) - mp.X(i, j));
        B(k, j) += lc * mp.Y(i, k);
        B(k, n + j) += lc * mp.Y(i, k);
      }
  };

  auto forcing = [&](std::size_t m, int k, double& gy, double& gz) {
    gy = initial.y[k] * S[m] + noises.y0[k][m];
    gz = initial.z[k] + initial.y[k] * F[m] + noises.z0[k][m];
    for (const auto& p : noises.pairs) {
      if (p.k != k) continue;
      gy += p.y[m] + p.b[m];
      gz += p.z[m] - p.b[m];
    }
  };

  FluctuationSample out;
  out.times = noises.times;
  out.n_types = n;
  out.noises = noises;
  out.x.assign(T * n, 0.0);
  out.y.assign(T * n, 0.0);
  out.z.assign(T * n, 0.0);

  std::vector<Eigen::VectorXd> alpha(T), beta(T);
  Eigen::MatrixXd A, B;
  Eigen::VectorXd u(2 * n);
  for (int k = 0; k < n; ++k) {
    out.y[k] = initial.y[k];
    out.z[k] = initial.z[k];
    out.x[k] = -initial.y[k] - initial.z[k];
    u[k] = initial.y[k] * S[0];
    u[n + k] = initial.z[k] + initial.y[k] * F[0];
  }
  linear_maps(0, A, B);
  alpha[0] = A * u;
  beta[0] = B * u;

  Eigen::VectorXd drain = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd known(2 * n);
  for (std::size_t m = 1; m < T; ++m) {
    drain += (m == 1 ? 0.5 : 1.0) * h * beta[m - 1];
    for (int k = 0; k < n; ++k) {
      double cy = 0.5 * S[m] * alpha[0][k], cz = 0.5 * F[m] * alpha[0][k];
      for (std::size_t i = 1; i < m; ++i) {
        cy += S[m - i] * alpha[i][k];
        cz += F[m - i] * alpha[i][k];
      }
      double gy = 0.0, gz = 0.0;
      forcing(m, k, gy, gz);
      known[k] = gy + h * cy - drain[k];
      known[n + k] = gz + h * cz + drain[k];
    }
    linear_maps(m, A, B);
    Eigen::MatrixXd L(2 * n, 2 * n);
    L.topRows(n) = S[0] * A - B;
    L.bottomRows(n) = F[0] * A + B;
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(2 * n, 2 * n) - 0.5 * h * L;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    if (!lu.isInvertible())
      throw Error(ErrorCode::kFixedPointDiverged, "singular endpoint system at step " + std::to_string(m));
    u = lu.solve(known);
    if (!u.allFinite())
      throw Error(ErrorCode::kFixedPointDiverged, "non-finite solution at step " + std::to_string(m));
    alpha[m] = A * u;
    beta[m] = B * u;
    for (int k = 0; k < n; ++k) {
      out.y[m * n + k] = u[k];
      out.z[m * n + k] = u[n + k];
      out.x[m * n + k] = -u[k] - u[n + k];
    }
  }
  return out;
}

double EmpiricalFluctuations::total(int r, std::size_t g, int s) const {
  double sum = 0.0;
  for (int k = 0; k < n_types; ++k) sum += at(r, g, k, s);
  return sum;
}

std::vector<double> EmpiricalFluctuations::column(std::size_t g, int s) const {
  std::vector<double> out(n_replicas);
  for (int r = 0; r < n_replicas; ++r) out[r] = total(r, g, s);
  return out;
}

EmpiricalFluctuations center_and_rescale(const std::vector<Trajectory>& replicas,
                                         const MeanFieldSolution* reference) {
  if (replicas.empty()) throw Error(ErrorCode::kInvalidArgument, "no replicas");
  const Trajectory& first = replicas.front();
  for (const auto& tr : replicas)
    if (tr.times != first.times || tr.type_sizes != first.type_sizes || tr.n_types != first.n_types)
      throw Error(ErrorCode::kGridMismatch, "replicas differ in grid or graph size");

  EmpiricalFluctuations out;
  out.reference = reference ? Centering::kMeanField : Centering::kEmpiricalMean;
  out.times = first.times;
  out.n_types = first.n_types;
  out.n_replicas = static_cast<int>(replicas.size());
  out.n_vertices = first.num_vertices();
  const std::size_t T = out.times.size();
  const int n = out.n_types;
  const double N = static_cast<double>(out.n_vertices);
  const double root = std::sqrt(N);

  std::vector<double> ref(T * n * 3, 0.0);
  if (reference) {
    if (reference->n_types != n) throw Error(ErrorCode::kGridMismatch, "reference has a different type count");
    for (std::size_t g = 0; g < T; ++g) {
      std::size_t idx = 0;
      try {
        idx = reference->index_of(out.times[g]);
      } catch (const Error& e) {
        throw Error(ErrorCode::kGridMismatch, std::string("reference grid: ") + e.what());
      }
      for (int k = 0; k < n; ++k) {
        ref[(g * n + k) * 3 + 0] = reference->X(idx, k);
        ref[(g * n + k) * 3 + 1] = reference->Y(idx, k);
        ref[(g * n + k) * 3 + 2] = reference->Z(idx, k);
      }
    }
  } else {
    for (const auto& tr : replicas)
      for (std::size_t i = 0; i < ref.size(); ++i) ref[i] += static_cast<double>(tr.counts[i]) / N;
    for (double& v : ref) v /= out.n_replicas;
  }

  out.values.resize(replicas.size() * ref.size());
  for (std::size_t r = 0; r < replicas.size(); ++r)
    for (std::size_t i = 0; i < ref.size(); ++i)
      out.values[r * ref.size() + i] = root * (static_cast<double>(replicas[r].counts[i]) / N - ref[i]);
  return out;
}

MomentStats moment_stats(const std::vector<double>& samples) {
  MomentStats st;
  st.n = samples.size();
  st.too_few = st.n < 30;
  if (st.n == 0) {
    st.degenerate = true;
    st.mean = st.variance = st.skewness = st.excess_kurtosis = kNaN;
    return st;
  }
  const double n = static_cast<double>(st.n);
  for (double v : samples) st.mean += v;
  st.mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : samples) {
    const double d = v - st.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  st.variance = st.n > 1 ? m2 * n / (n - 1) : 0.0;
  if (m2 <= 1e-300 * std::max(1.0, st.mean * st.mean) || st.n < 4) {
    st.degenerate = m2 <= 1e-300 * std::max(1.0, st.mean * st.mean);
    if (st.degenerate) st.variance = 0.0;
    st.skewness = st.excess_kurtosis = kNaN;
    return st;
  }
  const double g1 = m3 / std::pow(m2, 1.5);
  const double g2 = m4 / (m2 * m2) - 3.0;
  st.skewness = std::sqrt(n * (n - 1)) / (n - 2) * g1;
  st.excess_kurtosis = ((n + 1) * g2 + 6) * (n - 1) / ((n - 2) * (n - 3));
  st.se_skewness = std::sqrt(6 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)));
  st.se_kurtosis = 2 * st.se_skewness * std::sqrt((n * n - 1) / ((n - 3) * (n + 5)));
  return st;
}

namespace {

double unbiased_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

VarianceRatio variance_scaling_check(const std::vector<double>& small_size,
                                     const std::vector<double>& large_size, std::uint64_t seed,
                                     int n_boot) {
  VarianceRatio out;
  out.too_few = small_size.size() < 30 || large_size.size() < 30;
  out.var_small = unbiased_variance(small_size);
  out.var_large = unbiased_variance(large_size);
  if (!(out.var_small > 0) || !(out.var_large > 0)) {
    out.degenerate = true;
    out.ratio = out.ci_low = out.ci_high = kNaN;
    return out;
  }
  out.ratio = out.var_small / out.var_large;

  Rng rng(seed);
  std::vector<double> ratios;
  std::vector<double> a(small_size.size()), b(large_size.size());
  for (int it = 0; it < n_boot; ++it) {
    for (double& x : a) x = small_size[rng.below(small_size.size())];
    for (double& x : b) x = large_size[rng.below(large_size.size())];
    const double vb = unbiased_variance(b);
    if (vb > 0) ratios.push_back(unbiased_variance(a) / vb);
  }
  if (ratios.empty()) {
    out.ci_low = out.ci_high = kNaN;
    return out;
  }
  std::sort(ratios.begin(), ratios.end());
  auto pct = [&](double q) {
    const auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(ratios.size() - 1)));
    return ratios[i];
  };
  out.ci_low = pct(0.025);
  out.ci_high = pct(0.975);
  return out;
}

std::vector<double> densities_at(const std::vector<Trajectory>& replicas, double t, int state) {
  std::vector<double> out;
  for (const auto& tr : replicas) {
    std::size_t g = tr.times.size();
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      if (std::abs(tr.times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) g = i;
    if (g == tr.times.size())
      throw Error(ErrorCode::kTimesOutsideGrid, "time " + std::to_string(t) + " is not on the replica grid");
    out.push_back(static_cast<double>(tr.total(g, state)) / static_cast<double>(tr.num_vertices()));
  }
  return out;
}

}  // namespace rumorlab
