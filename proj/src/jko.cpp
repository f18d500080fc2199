#include "thinfilm/jko.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "thinfilm/lagrangian.hpp"
#include "thinfilm/transport.hpp"

namespace thinfilm {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double min_gap(std::span<const double> x) {
  double g = x[1] - x[0];
  for (std::size_t i = 2; i < x.size(); ++i) g = std::min(g, x[i] - x[i - 1]);
  return g;
}

// Fornberg's recursion for finite-difference weights of derivative order m at
// z on the nodes x[0..n).
void fd_weights(double z, std::span<const double> x, int m, std::span<double> out) {
  const std::size_t n = x.size();
  std::vector<double> c(n * static_cast<std::size_t>(m + 1), 0.0);
  auto at = [&](std::size_t i, int k) -> double& { return c[i * static_cast<std::size_t>(m + 1) + k]; };
  double c1 = 1.0, c4 = x[0] - z;
  at(0, 0) = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          at(i, k) = c1 * (k * at(i - 1, k - 1) - c5 * at(i - 1, k)) / c2;
        at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) at(j, k) = (c4 * at(j, k) - k * at(j, k - 1)) / c3;
      at(j, 0) = c4 * at(j, 0) / c3;
    }
    c1 = c2;
  }
  for (std::size_t j = 0; j < n; ++j) out[j] = at(j, m);
}

}  // namespace

void JkoConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("JkoConfig: tau must be positive");
  if (n_cells < 32) throw std::invalid_argument("JkoConfig: n_cells must be at least 32");
  if (!(eps_mono >= 0.0)) throw std::invalid_argument("JkoConfig: eps_mono must be nonnegative");
  if (!(inner_tol > 0.0)) throw std::invalid_argument("JkoConfig: inner_tol must be positive");
  if (max_inner_iters < 1) throw std::invalid_argument("JkoConfig: max_inner_iters must be positive");
  if (!(el_check_tol > 0.0)) throw std::invalid_argument("JkoConfig: el_check_tol must be positive");
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 2.0)) throw std::invalid_argument("JkoConfig: p values must lie in [0, 2]");
}

JkoConfig resolve_config(const JkoConfig& config, const QuantileDensity& initial) {
  config.validate();
  JkoConfig c = config;
  if (c.eps_mono == 0.0) c.eps_mono = 1e-9 * (initial.back() - initial.front());
  return c;
}

double objective(std::span<const double> x, std::span<const double> x_prev, double mass,
                 const JkoConfig& config, const SmythHill& smyth) {
  if (x.size() != x_prev.size()) throw std::invalid_argument("objective: length mismatch");
  if (x.size() < 4) throw std::invalid_argument("objective: need at least 4 positions");
  const double floor = config.eps_mono > 0.0 ? config.eps_mono : 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] - x[i - 1] > floor))
      throw std::invalid_argument("objective: positions violate the monotonicity floor");
  const double h = mass / static_cast<double>(x.size());
  double move = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_prev[i];
    move += d * d;
  }
  return config.tau * (lagrangian::energy(x, h) - smyth.energy()) + 0.5 * h * move;
}

StepResult step(const QuantileDensity& prev, const JkoConfig& config, const SmythHill& smyth) {
  const JkoConfig cfg = resolve_config(config, prev);
  const std::size_t n = prev.size();
  const double h = prev.cell_mass();
  const double tau = cfg.tau;
  const auto y = prev.positions();

  std::vector<double> x(y.begin(), y.end());
  std::vector<double> grad(n), trial(n), dir(n);
  lagrangian::Band5 hess(n);

  auto value = [&](std::span<const double> z) {
    double move = 0.0;
    for (std::size_t i = 0; i < n; ++i) move += (z[i] - y[i]) * (z[i] - y[i]);
    return tau * (lagrangian::energy(z, h) - smyth.energy()) + 0.5 * h * move;
  };

  JkoStepDiagnostics diag;
  diag.objective_initial = value(x);
  double f = diag.objective_initial;
  diag.converged = false;

  // Gradient scale below which roundoff dominates: that of the quadratic
  // confinement term alone.
  const double abs_floor = 1e-12 * tau * h * std::sqrt(dot(y, y));
  // Resolution of the objective in double precision.
  const double f_noise =
      64.0 * std::numeric_limits<double>::epsilon() * tau *
      (std::abs(lagrangian::energy(y, h)) + smyth.energy());
  auto gradient_norm = [&](std::span<const double> z) {
    std::vector<double> gz(n);
    lagrangian::energy_gradient(z, h, gz);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = tau * gz[i] + h * (z[i] - y[i]);
      sum += gi * gi;
    }
    return std::sqrt(sum);
  };

  // The gradient has a roundoff floor of its own; stop once it no longer
  // shrinks over several iterations.
  double best_g = std::numeric_limits<double>::infinity();
  int stalled = 0;
  int it = 0;
  for (; it < cfg.max_inner_iters; ++it) {
    lagrangian::energy_gradient(x, h, grad);
    double e_norm = 0.0, m_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e_norm += tau * tau * grad[i] * grad[i];
      m_norm += h * h * (x[i] - y[i]) * (x[i] - y[i]);
      grad[i] = tau * grad[i] + h * (x[i] - y[i]);
    }
    const double g_norm = std::sqrt(dot(grad, grad));
    const double scale = std::max(std::sqrt(e_norm), std::sqrt(m_norm));
    diag.gradient_ratio = scale > 0.0 ? g_norm / scale : 0.0;
    if (g_norm <= cfg.inner_tol * scale || g_norm <= abs_floor) {
      diag.converged = true;
      break;
    }
    if (g_norm < 0.5 * best_g) {
      best_g = g_norm;
      stalled = 0;
    } else if (++stalled >= 4) {
      break;
    }

    // Newton direction with a Levenberg shift when tau Hess E + h I is not
    // positive definite.
    lagrangian::energy_hessian(x, h, hess);
    double shift = 0.0;
    bool factored = false;
    for (int attempt = 0; attempt < 30 && !factored; ++attempt) {
      if (attempt > 0) shift = shift == 0.0 ? 1e-6 * h : 10.0 * shift;
      lagrangian::Band5 scaled(n);
      for (std::size_t i = 0; i < n; ++i) {
        scaled.add(i, i, tau * hess.at(i, i) + h + shift);
        if (i + 1 < n) scaled.add(i, i + 1, tau * hess.at(i, i + 1));
        if (i + 2 < n) scaled.add(i, i + 2, tau * hess.at(i, i + 2));
      }
      if (scaled.factorize()) {
        for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
        scaled.solve(dir);
        factored = true;
      }
    }
    double slope = dot(grad, dir);
    if (!factored || !(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i] / h;
      slope = dot(grad, dir);
    }

    double t = 1.0;
    bool accepted = false;
    double f_trial = f;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + t * dir[i];
      if (min_gap(trial) <= cfg.eps_mono) continue;
      f_trial = value(trial);
      if (f_trial <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      // Close to the minimiser the predicted decrease drops below the
      // resolution of the objective; there a full step is taken if the
      // objective stays within roundoff and the gradient shrinks.
      if (ls == 0 && f_trial <= f + f_noise && gradient_norm(trial) < 0.5 * g_norm) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    x.swap(trial);
    f = f_trial;
  }
  diag.inner_iters = it;
  diag.objective_final = f;

  if (!(diag.objective_final <= diag.objective_initial + f_noise)) {
    std::ostringstream os;
    os << "JKO step: objective rose from " << diag.objective_initial << " to "
       << diag.objective_final;
    throw StepFailure(os.str(), diag);
  }
  if (!diag.converged && it >= cfg.max_inner_iters && !(f < diag.objective_initial)) {
    throw StepFailure("JKO step: no decrease within max_inner_iters", diag);
  }

  QuantileDensity next(prev.mass(), std::move(x));
  diag.w2_sq_moved = 0.5 * w2_sq(next, prev);
  diag.el_residual = el_residual(next, prev, cfg);
  diag.edge_slope_indicator = edge_slope_indicator(next);
  return StepResult{std::move(next), diag};
}

double el_residual(const QuantileDensity& next, const QuantileDensity& prev,
                   const JkoConfig& config) {
  if (next.size() != prev.size()) throw std::invalid_argument("el_residual: cell counts differ");
  const std::size_t n = next.size();
  if (n < 16) throw std::invalid_argument("el_residual: need at least 16 cells");
  const auto x = next.positions();
  const auto y = prev.positions();
  const double h = next.cell_mass();
  const double tau = config.tau;
  const std::vector<double> v = nodal_density(next);

  std::vector<double> w(5);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 3; i + 4 < n; ++i) {
    const double s = next.fraction(i) / next.mass();
    if (s < 0.1 || s > 0.9) continue;
    fd_weights(x[i], x.subspan(i - 2, 5), 3, w);
    double vxxx = 0.0;
    for (std::size_t k = 0; k < 5; ++k) vxxx += w[k] * v[i - 2 + k];
    const double mismatch = (y[i] - x[i]) - tau * (x[i] - vxxx);
    num += h * mismatch * mismatch;
    den += h * x[i] * x[i];
  }
  if (!(den > 0.0)) return 0.0;
  return std::sqrt(num) / (tau * std::sqrt(den));
}

double edge_slope_indicator(const QuantileDensity& q) {
  const auto x = q.positions();
  const std::size_t n = x.size();
  const double h = q.cell_mass();
  double best = 0.0;
  auto slope_at = [&](std::size_t i) {
    const double wl = x[i] - x[i - 1], wr = x[i + 1] - x[i];
    return std::abs(h / wr - h / wl) / (0.5 * (wl + wr));
  };
  for (std::size_t k = 1; k <= 3 && k + 1 < n; ++k) {
    best = std::max(best, slope_at(k));
    best = std::max(best, slope_at(n - 1 - k));
  }
  return best;
}

namespace {

Snapshot make_snapshot(double time, QuantileDensity state, const JkoStepDiagnostics& diag,
                       const JkoConfig& config, const SmythHill& smyth) {
  FunctionalRecord rec = record(state, time, smyth, config.p_values);
  return Snapshot{time, std::move(state), std::move(rec), diag};
}

}  // namespace

void extend(JkoTrajectory& trajectory, double t_final, const SmythHill& smyth,
            const StepObserver& observer) {
  if (trajectory.snapshots.empty()) throw std::invalid_argument("extend: empty trajectory");
  const JkoConfig& cfg = trajectory.config;
  const double tau = cfg.tau;
  const auto total = static_cast<std::size_t>(std::ceil(t_final / tau - 1e-9));
  while (trajectory.steps() < total) {
    const Snapshot& last = trajectory.snapshots.back();
    StepResult res = [&] {
      try {
        return step(last.state, cfg, smyth);
      } catch (const StepFailure& failure) {
        std::ostringstream os;
        os << failure.what() << " (step " << trajectory.steps() + 1 << ")";
        throw RunFailure(os.str(), trajectory, failure.diagnostics());
      }
    }();
    const double time = static_cast<double>(trajectory.steps() + 1) * tau;
    trajectory.snapshots.push_back(
        make_snapshot(time, std::move(res.state), res.diagnostics, cfg, smyth));
    if (observer && !observer(trajectory.snapshots.back())) break;
  }
}

JkoTrajectory run(const QuantileDensity& initial, double t_final, const JkoConfig& config,
                  const SmythHill& smyth, const StepObserver& observer) {
  if (!(t_final >= 0.0)) throw std::invalid_argument("run: t_final must be nonnegative");
  require_matching_mass(initial.mass(), smyth, "run");
  JkoTrajectory traj;
  traj.config = resolve_config(config, initial);
  if (initial.size() != traj.config.n_cells)
    throw std::invalid_argument("run: initial state does not have n_cells positions");
  traj.snapshots.push_back(make_snapshot(0.0, initial, JkoStepDiagnostics{}, traj.config, smyth));
  if (observer && !observer(traj.snapshots.back())) return traj;
  extend(traj, t_final, smyth, observer);
  return traj;
}

JkoTrajectory run(const GridDensity& v0, double t_final, const JkoConfig& config,
                  const SmythHill& smyth, const StepObserver& observer) {
  config.validate();
  require_matching_mass(v0.mass(), smyth, "run");
  const double e0 = energy(v0), m4 = moment(v0, 4);
  if (!std::isfinite(e0) || !std::isfinite(m4))
    throw std::invalid_argument("run: initial energy or fourth moment is not finite");
  return run(grid_to_quantile(v0, config.n_cells), t_final, config, smyth, observer);
}

// ---------------------------------------------------------------------------
// Weak form

namespace {

// Bump b(y) = exp(-1/(1 - y^2)) and its first three derivatives.
struct Bump {
  double b, b1, b2, b3;
};

Bump bump(double y) {
  if (!(std::abs(y) < 1.0)) return Bump{0.0, 0.0, 0.0, 0.0};
  const double u = 1.0 - y * y;
  const double g = std::exp(-1.0 / u);
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
  const double f1 = -2.0 * y / u2;
  const double f2 = -2.0 / u2 - 8.0 * y * y / u3;
  const double f3 = -24.0 * y / u3 - 48.0 * y * y * y / u4;
  return Bump{g, g * f1, g * (f2 + f1 * f1), g * (f3 + 3.0 * f1 * f2 + f1 * f1 * f1)};
}

}  // namespace

std::vector<TestFunction> default_test_functions(const JkoTrajectory& trajectory) {
  if (trajectory.snapshots.size() < 10)
    throw std::invalid_argument("default_test_functions: need at least 10 snapshots");
  const Snapshot& mid = trajectory.snapshots[trajectory.snapshots.size() / 2];
  const double a = mid.state.front(), b = mid.state.back();
  const double t_end = trajectory.snapshots.back().time;
  const double width = b - a;
  std::vector<TestFunction> tests;
  for (double c : {0.3, 0.5, 0.7})
    tests.push_back(TestFunction{a + c * width, 0.25 * width, 0.5 * t_end, 0.45 * t_end});
  return tests;
}

std::vector<double> weak_form_residual(const JkoTrajectory& trajectory,
                                       std::span<const TestFunction> tests) {
  const auto& snaps = trajectory.snapshots;
  if (snaps.size() < 10) throw std::invalid_argument("weak_form_residual: need at least 10 snapshots");
  // Two-point Gauss rule on each time interval.
  const double g = 0.5 / std::sqrt(3.0);
  std::vector<double> out;
  out.reserve(tests.size());
  for (const TestFunction& tf : tests) {
    if (!(tf.rx > 0.0) || !(tf.rt > 0.0))
      throw std::invalid_argument("weak_form_residual: test function radii must be positive");
    double total = 0.0;
    for (std::size_t n = 0; n + 1 < snaps.size(); ++n) {
      const double t0 = snaps[n].time, t1 = snaps[n + 1].time;
      const double dt = t1 - t0;
      // -int v zeta_t dt over (t0, t1] with v = v_{n+1}: zeta(t1) - zeta(t0).
      const double bt1 = bump((t1 - tf.t0) / tf.rt).b, bt0 = bump((t0 - tf.t0) / tf.rt).b;
      const double tm1 = 0.5 * (t0 + t1) - g * dt, tm2 = 0.5 * (t0 + t1) + g * dt;
      const double bint = 0.5 * dt * (bump((tm1 - tf.t0) / tf.rt).b + bump((tm2 - tf.t0) / tf.rt).b);
      if (bt1 == 0.0 && bt0 == 0.0 && bint == 0.0) continue;

      const auto x = snaps[n + 1].state.positions();
      const double h = snaps[n + 1].state.cell_mass();
      double time_part = 0.0, space_part = 0.0;
      // -int v zeta_t: sum over mass h at X_i.
      for (std::size_t i = 0; i < x.size(); ++i) {
        const Bump bx = bump((x[i] - tf.x0) / tf.rx);
        time_part -= h * bx.b * (bt1 - bt0);
        // x v zeta_x dx = x zeta_x dm
        space_part += h * x[i] * bx.b1 / tf.rx;
      }
      for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const Bump bx = bump((x[i] - tf.x0) / tf.rx);
        if (bx.b == 0.0 && bx.b2 == 0.0 && bx.b3 == 0.0) continue;
        const double wl = x[i] - x[i - 1], wr = x[i + 1] - x[i];
        const double d = 0.5 * (wl + wr);
        const double vx = (h / wr - h / wl) / d;
        const double v = h / d;
        const double zxx = bx.b2 / (tf.rx * tf.rx), zxxx = bx.b3 / (tf.rx * tf.rx * tf.rx);
        space_part += d * (-1.5 * vx * vx * zxx - v * vx * zxxx);
      }
      total += time_part + bint * space_part;
    }
    const double norm = std::exp(-1.0) * (2.0 * tf.rx) * (2.0 * tf.rt);
    out.push_back(std::abs(total) / norm);
  }
  return out;
}

}  // namespace thinfilm
