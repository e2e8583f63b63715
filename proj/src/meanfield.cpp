#include "rumorlab/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rumorlab/error.hpp"

namespace rumorlab {

MeanFieldProblem MeanFieldProblem::from_fractions(TypeBlueprint bp, double lambda, StiflingLaw law,
                                                  const std::vector<double>& spreader_fraction,
                                                  const std::vector<double>& stifler_fraction,
                                                  double t_max, double dt) {
  MeanFieldProblem p{std::move(bp), lambda, law, {}, {}, t_max, dt};
  const int n = p.blueprint.n_types();
  if (static_cast<int>(spreader_fraction.size()) != n || static_cast<int>(stifler_fraction.size()) != n)
    throw Error(ErrorCode::kInvalidArgument, "need one initial fraction per type");
  for (int k = 0; k < n; ++k) {
    p.spreader0.push_back(spreader_fraction[k] * p.blueprint.proportion(k));
    p.stifler0.push_back(stifler_fraction[k] * p.blueprint.proportion(k));
  }
  return p;
}

std::size_t MeanFieldSolution::index_of(double t) const {
  const double h = dt();
  if (times.empty()) throw Error(ErrorCode::kTimesOutsideGrid, "empty solution");
  if (h == 0.0) {
    if (std::abs(t - times[0]) <= 1e-12) return 0;
    throw Error(ErrorCode::kTimesOutsideGrid, "time " + std::to_string(t) + " is not a grid node");
  }
  const double r = t / h;
  const auto m = static_cast<long long>(std::llround(r));
  if (m < 0 || m >= static_cast<long long>(times.size()) || std::abs(r - m) > 1e-6)
    throw Error(ErrorCode::kTimesOutsideGrid, "time " + std::to_string(t) + " is not a grid node");
  return static_cast<std::size_t>(m);
}

void validate_problem(const MeanFieldProblem& p) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  const int n = p.blueprint.n_types();
  if (!(std::isfinite(p.lambda) && p.lambda > 0)) fail("lambda must be > 0");
  if (!(std::isfinite(p.dt) && p.dt > 0)) fail("dt must be > 0");
  if (!(std::isfinite(p.t_max) && p.t_max >= 0)) fail("t_max must be >= 0");
  if (static_cast<int>(p.spreader0.size()) != n || static_cast<int>(p.stifler0.size()) != n)
    fail("need one initial density per type");
  for (int k = 0; k < n; ++k) {
    const double pk = p.blueprint.proportion(k);
    if (p.spreader0[k] < 0 || p.stifler0[k] < 0 || p.spreader0[k] + p.stifler0[k] > pk + 1e-12)
      fail("initial densities of type " + std::to_string(k) + " must lie in the simplex slice of mass p_k");
  }
}

namespace {

std::vector<double> make_grid(const MeanFieldProblem& p, int& steps, double& h) {
  steps = static_cast<int>(std::llround(p.t_max / p.dt));
  h = steps > 0 ? p.t_max / steps : 0.0;
  std::vector<double> times(steps + 1);
  for (int m = 0; m <= steps; ++m) times[m] = (m == steps) ? p.t_max : m * h;
  return times;
}

struct Rates {
  const TypeBlueprint& bp;
  double lambda;

  // a_k, b_k and the per-spreader contact hazard b_k / y_k from densities
  // y, z (x = p - y - z).
  void operator()(const double* y, const double* z, double* a, double* b, double* hazard = nullptr) const {
    const int n = bp.n_types();
    for (int k = 0; k < n; ++k) {
      const double xk = bp.proportion(k) - y[k] - z[k];
      double contact_y = 0.0, contact_known = 0.0;
      for (int j = 0; j < n; ++j) {
        if (bp.count(k, j) == 0) continue;
        const double c = bp.coupling(k, j);
        contact_y += c * y[j];
        contact_known += c * (y[j] + z[j]);  // p_j - X_j
      }
      a[k] = lambda * xk * contact_y;
      b[k] = lambda * y[k] * contact_known;
      if (hazard) hazard[k] = lambda * contact_known;
    }
  }
};

}  // namespace

namespace {

struct Setup {
  int n = 0;
  int steps = 0;
  double h = 0.0;
  std::vector<double> surv, cdf;
  MeanFieldSolution sol;
};

Setup prepare(const MeanFieldProblem& p) {
  validate_problem(p);
  Setup s;
  s.n = p.blueprint.n_types();
  s.sol.times = make_grid(p, s.steps, s.h);
  s.sol.n_types = s.n;
  s.sol.proportions = p.blueprint.proportions();
  s.sol.x.assign((s.steps + 1) * s.n, 0.0);
  s.sol.y.assign((s.steps + 1) * s.n, 0.0);
  s.sol.z.assign((s.steps + 1) * s.n, 0.0);
  s.surv.resize(s.steps + 1);
  s.cdf.resize(s.steps + 1);
  for (int i = 0; i <= s.steps; ++i) {
    s.cdf[i] = p.law.cdf(i * s.h);
    s.surv[i] = p.law.survival(i * s.h);
  }
  for (int k = 0; k < s.n; ++k) {
    s.sol.y[k] = p.spreader0[k];
    s.sol.z[k] = p.stifler0[k];
    s.sol.x[k] = p.blueprint.proportion(k) - p.spreader0[k] - p.stifler0[k];
  }
  return s;
}

[[noreturn]] void diverged(const MeanFieldSolution& sol, int m, double residual, int iterations) {
  throw Error(ErrorCode::kFixedPointDiverged, "step " + std::to_string(m) + " (t=" + std::to_string(sol.times[m]) +
                                                  "): residual " + std::to_string(residual) + " after " +
                                                  std::to_string(iterations) + " iterations");
}

MeanFieldSolution solve_separate(const MeanFieldProblem& p, const FixedPointOptions& options) {
  Setup setup = prepare(p);
  const int n = setup.n, steps = setup.steps;
  const double h = setup.h;
  const std::vector<double>& surv = setup.surv;
  const std::vector<double>& cdf = setup.cdf;
  MeanFieldSolution& sol = setup.sol;

  const Rates rates{p.blueprint, p.lambda};
  std::vector<double> a((steps + 1) * n), b((steps + 1) * n);

  // Integrands use the state just after t = 0, which differs from the
  // initial value only when F has an atom at 0.
  std::vector<double> y_plus(n), z_plus(n);
  for (int k = 0; k < n; ++k) {
    y_plus[k] = p.spreader0[k] * surv[0];
    z_plus[k] = p.stifler0[k] + p.spreader0[k] * cdf[0];
  }
  rates(y_plus.data(), z_plus.data(), a.data(), b.data());

  std::vector<double> conv_y(n), conv_z(n), drain(n, 0.0), y(n), z(n), y_new(n), z_new(n);
  std::vector<double> a_m(n), b_m(n);
  for (int m = 1; m <= steps; ++m) {
    // Known part of the trapezoid sums: nodes 0..m-1.
    for (int k = 0; k < n; ++k) {
      conv_y[k] = 0.5 * surv[m] * a[k];
      conv_z[k] = 0.5 * cdf[m] * a[k];
      drain[k] += (m == 1 ? 0.5 : 1.0) * b[(m - 1) * n + k];
    }
    for (int i = 1; i < m; ++i) {
      const double ks = surv[m - i], kf = cdf[m - i];
      const double* ai = &a[i * n];
      for (int k = 0; k < n; ++k) {
        conv_y[k] += ks * ai[k];
        conv_z[k] += kf * ai[k];
      }
    }

    // Fixed point for the endpoint, warm-started from the previous node.
    for (int k = 0; k < n; ++k) {
      y[k] = (m == 1) ? y_plus[k] : sol.y[(m - 1) * n + k];
      z[k] = (m == 1) ? z_plus[k] : sol.z[(m - 1) * n + k];
    }
    double residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < options.max_iterations && !(residual <= options.tolerance); ++iter) {
      rates(y.data(), z.data(), a_m.data(), b_m.data());
      residual = 0.0;
      for (int k = 0; k < n; ++k) {
        y_new[k] = p.spreader0[k] * surv[m] + h * (conv_y[k] + 0.5 * surv[0] * a_m[k]) -
                   h * (drain[k] + 0.5 * b_m[k]);
        z_new[k] = p.stifler0[k] + p.spreader0[k] * cdf[m] + h * (conv_z[k] + 0.5 * cdf[0] * a_m[k]) +
                   h * (drain[k] + 0.5 * b_m[k]);
        residual = std::max({residual, std::abs(y_new[k] - y[k]), std::abs(z_new[k] - z[k])});
      }
      y.swap(y_new);
      z.swap(z_new);
    }
    if (!(residual <= options.tolerance)) diverged(sol, m, residual, options.max_iterations);

    rates(y.data(), z.data(), &a[m * n], &b[m * n]);
    for (int k = 0; k < n; ++k) {
      sol.y[m * n + k] = y[k];
      sol.z[m * n + k] = z[k];
      sol.x[m * n + k] = p.blueprint.proportion(k) - y[k] - z[k];
    }
  }
  return std::move(setup.sol);
}

// Y_k(t) = Y_k(0) F^c(t) S_k(0,t) + int_0^t F^c(t-s) S_k(s,t) a_k(s) ds with
// S_k(s,t) = exp(-int_s^t kappa_k), kappa_k the contact hazard of one
// k-spreader; X_k(t) = X_k(0) - int_0^t a_k; Z_k = p_k - X_k - Y_k.
MeanFieldSolution solve_competing(const MeanFieldProblem& p, const FixedPointOptions& options) {
  Setup setup = prepare(p);
  const int n = setup.n, steps = setup.steps;
  const double h = setup.h;
  const std::vector<double>& surv = setup.surv;
  MeanFieldSolution& sol = setup.sol;

  const Rates rates{p.blueprint, p.lambda};
  std::vector<double> a((steps + 1) * n), kappa((steps + 1) * n), exposure((steps + 1) * n, 0.0);
  std::vector<double> scratch(n);

  std::vector<double> y_plus(n), z_plus(n);
  for (int k = 0; k < n; ++k) {
    y_plus[k] = p.spreader0[k] * surv[0];
    z_plus[k] = p.stifler0[k] + p.spreader0[k] * setup.cdf[0];
  }
  rates(y_plus.data(), z_plus.data(), a.data(), scratch.data(), kappa.data());

  std::vector<double> carried(n), x(n), y(n), z(n), a_m(n), kappa_m(n);
  for (int m = 1; m <= steps; ++m) {
    const double* k_prev = &exposure[(m - 1) * n];
    // Conversions at nodes 0..m-1, discounted to t_{m-1}.
    for (int k = 0; k < n; ++k) carried[k] = 0.5 * surv[m] * std::exp(-k_prev[k]) * a[k];
    for (int i = 1; i < m; ++i)
      for (int k = 0; k < n; ++k)
        carried[k] += surv[m - i] * std::exp(exposure[i * n + k] - k_prev[k]) * a[i * n + k];

    for (int k = 0; k < n; ++k) {
      x[k] = sol.x[(m - 1) * n + k];
      y[k] = m == 1 ? y_plus[k] : sol.y[(m - 1) * n + k];
      z[k] = p.blueprint.proportion(k) - x[k] - y[k];
    }
    double residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < options.max_iterations && !(residual <= options.tolerance); ++iter) {
      rates(y.data(), z.data(), a_m.data(), scratch.data(), kappa_m.data());
      residual = 0.0;
      for (int k = 0; k < n; ++k) {
        const double step_exposure = 0.5 * h * (kappa[(m - 1) * n + k] + kappa_m[k]);
        const double k_m = k_prev[k] + step_exposure;
        const double y_new = p.spreader0[k] * surv[m] * std::exp(-k_m) +
                             h * (carried[k] * std::exp(-step_exposure) + 0.5 * surv[0] * a_m[k]);
        const double x_new = sol.x[(m - 1) * n + k] - 0.5 * h * (a[(m - 1) * n + k] + a_m[k]);
        residual = std::max({residual, std::abs(y_new - y[k]), std::abs(x_new - x[k])});
        y[k] = y_new;
        x[k] = x_new;
      }
      for (int k = 0; k < n; ++k) z[k] = p.blueprint.proportion(k) - x[k] - y[k];
    }
    if (!(residual <= options.tolerance)) diverged(sol, m, residual, options.max_iterations);

    rates(y.data(), z.data(), &a[m * n], scratch.data(), &kappa[m * n]);
    for (int k = 0; k < n; ++k) {
      exposure[m * n + k] = k_prev[k] + 0.5 * h * (kappa[(m - 1) * n + k] + kappa[m * n + k]);
      sol.x[m * n + k] = x[k];
      sol.y[m * n + k] = y[k];
      sol.z[m * n + k] = z[k];
    }
  }
  return std::move(setup.sol);
}

}  // namespace

MeanFieldSolution solve_flln(const MeanFieldProblem& p, const FixedPointOptions& options) {
  return p.form == FllnForm::kCompeting ? solve_competing(p, options) : solve_separate(p, options);
}

MeanFieldSolution classic_mt_ode(const MeanFieldProblem& p) {
  validate_problem(p);
  if (!p.law.is_never())
    throw Error(ErrorCode::kInvalidArgument, "the classic ODE reduction needs the Never law");
  const int n = p.blueprint.n_types();
  int steps = 0;
  double h = 0.0;

  MeanFieldSolution sol;
  sol.times = make_grid(p, steps, h);
  sol.n_types = n;
  sol.proportions = p.blueprint.proportions();
  sol.x.resize((steps + 1) * n);
  sol.y.resize((steps + 1) * n);
  sol.z.resize((steps + 1) * n);

  // State vector u = (Y_1..Y_n, Z_1..Z_n); Y' = a - b, Z' = b.
  const Rates rates{p.blueprint, p.lambda};
  auto rhs = [&](const std::vector<double>& u, std::vector<double>& du) {
    std::vector<double> a(n), b(n);
    rates(u.data(), u.data() + n, a.data(), b.data());
    for (int k = 0; k < n; ++k) {
      du[k] = a[k] - b[k];
      du[n + k] = b[k];
    }
  };

  std::vector<double> u(2 * n), k1(2 * n), k2(2 * n), k3(2 * n), k4(2 * n), tmp(2 * n);
  for (int k = 0; k < n; ++k) {
    u[k] = p.spreader0[k];
    u[n + k] = p.stifler0[k];
  }
  auto store = [&](int m) {
    for (int k = 0; k < n; ++k) {
      sol.y[m * n + k] = u[k];
      sol.z[m * n + k] = u[n + k];
      sol.x[m * n + k] = p.blueprint.proportion(k) - u[k] - u[n + k];
    }
  };
  store(0);
  for (int m = 1; m <= steps; ++m) {
    rhs(u, k1);
    for (int i = 0; i < 2 * n; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (int i = 0; i < 2 * n; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (int i = 0; i < 2 * n; ++i) tmp[i] = u[i] + h * k3[i];
    rhs(tmp, k4);
    for (int i = 0; i < 2 * n; ++i) u[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    store(m);
  }
  return sol;
}

double sup_distance(const MeanFieldSolution& a, const MeanFieldSolution& b) {
  if (a.n_types != b.n_types) throw Error(ErrorCode::kGridMismatch, "different type counts");
  const bool a_coarse = a.times.size() <= b.times.size();
  const MeanFieldSolution& coarse = a_coarse ? a : b;
  const MeanFieldSolution& fine = a_coarse ? b : a;
  const std::size_t cs = coarse.steps(), fs = fine.steps();
  if (cs == 0 || fs % cs != 0 || std::abs(coarse.times.back() - fine.times.back()) > 1e-9)
    throw Error(ErrorCode::kGridMismatch, "grids are not nested refinements of the same horizon");
  const std::size_t ratio = fs / cs;
  const int n = coarse.n_types;
  double worst = 0.0;
  for (std::size_t m = 0; m <= cs; ++m)
    for (int k = 0; k < n; ++k) {
      const std::size_t f = m * ratio;
      worst = std::max({worst, std::abs(coarse.X(m, k) - fine.X(f, k)),
                        std::abs(coarse.Y(m, k) - fine.Y(f, k)),
                        std::abs(coarse.Z(m, k) - fine.Z(f, k))});
    }
  return worst;
}

ConvergenceReport convergence_order(const MeanFieldProblem& problem, const std::vector<double>& dts,
                                    Solver solver) {
  if (dts.size() < 3) throw Error(ErrorCode::kInvalidArgument, "need at least 3 step sizes");
  const double ratio = dts[0] / dts[1];
  for (std::size_t i = 1; i < dts.size(); ++i)
    if (!(dts[i] < dts[i - 1]) || std::abs(dts[i - 1] / dts[i] - ratio) > 1e-9 * ratio)
      throw Error(ErrorCode::kInvalidArgument, "step sizes must decrease geometrically");

  std::vector<MeanFieldSolution> sols;
  for (double dt : dts) {
    MeanFieldProblem p = problem;
    p.dt = dt;
    sols.push_back(solver == Solver::kVolterra ? solve_flln(p) : classic_mt_ode(p));
  }

  ConvergenceReport rep;
  rep.dts = dts;
  const std::size_t f = dts.size() - 1;
  for (std::size_t i = 0; i <= f; ++i) rep.errors.push_back(i == f ? 0.0 : sup_distance(sols[i], sols[f]));
  for (std::size_t i = 0; i < f; ++i) rep.successive_differences.push_back(sup_distance(sols[i], sols[i + 1]));
  for (std::size_t i = 0; i + 1 < rep.successive_differences.size(); ++i) {
    const double d0 = rep.successive_differences[i], d1 = rep.successive_differences[i + 1];
    rep.pairwise_orders.push_back(d0 > 0 && d1 > 0 ? std::log(d0 / d1) / std::log(ratio)
                                                   : std::numeric_limits<double>::quiet_NaN());
  }

  constexpr double kDegenerate = 1e-13;
  const double e0 = rep.errors[f - 2], e1 = rep.errors[f - 1];
  if (e0 < kDegenerate || e1 < kDegenerate) {
    rep.degenerate = true;
    rep.order = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const double target = e0 / e1;
  const double h0 = dts[f - 2], h1 = dts[f - 1], hf = dts[f];
  auto model = [&](double q) {
    return (std::pow(h0, q) - std::pow(hf, q)) / (std::pow(h1, q) - std::pow(hf, q));
  };
  double lo = 1e-3, hi = 20.0;
  if (target <= model(lo)) {
    rep.order = lo;
  } else if (target >= model(hi)) {
    rep.order = hi;
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (model(mid) < target ? lo : hi) = mid;
    }
    rep.order = 0.5 * (lo + hi);
  }
  return rep;
}

}  // namespace rumorlab
