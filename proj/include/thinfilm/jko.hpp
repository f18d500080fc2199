#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thinfilm/density.hpp"
#include "thinfilm/functionals.hpp"

namespace thinfilm {

struct JkoConfig {
  double tau = 1e-3;
  std::size_t n_cells = 400;
  /// Floor on X_{i+1} - X_i. Zero selects 1e-9 times the initial support width.
  double eps_mono = 0.0;
  /// Stop when |grad| <= inner_tol * max(|tau grad E|, |h (X - X_prev)|).
  /// Roundoff in the gradient floors this ratio near 1e-7 at N = 400.
  double inner_tol = 1e-5;
  int max_inner_iters = 200;
  double el_check_tol = 0.05;
  std::vector<double> p_values = kDefaultPValues;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

struct JkoStepDiagnostics {
  double objective_initial = 0.0;
  double objective_final = 0.0;
  int inner_iters = 0;
  bool converged = true;
  /// Final |grad| relative to the scale used by the stopping rule.
  double gradient_ratio = 0.0;
  /// (1/2) W2^2(v_next, v_prev)
  double w2_sq_moved = 0.0;
  double el_residual = 0.0;
  double edge_slope_indicator = 0.0;
};

/// The inner solver could not lower the objective below its starting value.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, JkoStepDiagnostics diagnostics)
      : std::runtime_error(what), diagnostics_(diagnostics) {}
  const JkoStepDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  JkoStepDiagnostics diagnostics_;
};

struct Snapshot {
  double time;
  QuantileDensity state;
  FunctionalRecord record;
  JkoStepDiagnostics diagnostics;
};

struct JkoTrajectory {
  JkoConfig config;
  std::vector<Snapshot> snapshots;

  double mass() const { return snapshots.front().state.mass(); }
  std::size_t steps() const { return snapshots.empty() ? 0 : snapshots.size() - 1; }
};

/// A step failed during run(); carries everything computed before it.
class RunFailure : public std::runtime_error {
 public:
  RunFailure(const std::string& what, JkoTrajectory partial, JkoStepDiagnostics failed)
      : std::runtime_error(what), partial_(std::move(partial)), failed_(failed) {}
  const JkoTrajectory& partial() const noexcept { return partial_; }
  const JkoStepDiagnostics& failed_step() const noexcept { return failed_; }

 private:
  JkoTrajectory partial_;
  JkoStepDiagnostics failed_;
};

/// tau (E[X] - E[v_inf]) + (1/2)(M/N) sum (X_i - X_prev_i)^2.
double objective(std::span<const double> x, std::span<const double> x_prev, double mass,
                 const JkoConfig& config, const SmythHill& smyth);

struct StepResult {
  QuantileDensity state;
  JkoStepDiagnostics diagnostics;
};

/// One minimising-movement step by damped Newton iteration on the positions.
StepResult step(const QuantileDensity& prev, const JkoConfig& config, const SmythHill& smyth);

/// Relative L2(v dx) mismatch between the discrete map from v_next to v_prev
/// and x + tau (x - v_xxx), over the interior 80% of the mass.
double el_residual(const QuantileDensity& next, const QuantileDensity& prev,
                   const JkoConfig& config);

/// Largest |v_x| over the three cells nearest each end of the support.
double edge_slope_indicator(const QuantileDensity& q);

/// Resolves eps_mono = 0 against the initial state.
JkoConfig resolve_config(const JkoConfig& config, const QuantileDensity& initial);

/// Called after each accepted snapshot; returning false stops the run.
using StepObserver = std::function<bool(const Snapshot&)>;

JkoTrajectory run(const QuantileDensity& initial, double t_final, const JkoConfig& config,
                  const SmythHill& smyth, const StepObserver& observer = {});
JkoTrajectory run(const GridDensity& v0, double t_final, const JkoConfig& config,
                  const SmythHill& smyth, const StepObserver& observer = {});

/// Extends a trajectory in place until t_final.
void extend(JkoTrajectory& trajectory, double t_final, const SmythHill& smyth,
            const StepObserver& observer = {});

/// zeta(x, t) = b((x - x0) / rx) b((t - t0) / rt), with b(y) = exp(-1 / (1 - y^2)).
struct TestFunction {
  double x0, rx, t0, rt;
};

/// Test functions centred on the bulk of the trajectory's support and time span.
std::vector<TestFunction> default_test_functions(const JkoTrajectory& trajectory);

/// Weak-form residual of the equation for each test function:
///   int int [ -v zeta_t + x v zeta_x - (3/2) v_x^2 zeta_xx - v v_x zeta_xxx ] dx dt,
/// with v piecewise constant in time on (t_n, t_{n+1}], normalised by
/// max|zeta| times the area of the test function's support rectangle.
std::vector<double> weak_form_residual(const JkoTrajectory& trajectory,
                                       std::span<const TestFunction> tests);

}  // namespace thinfilm
