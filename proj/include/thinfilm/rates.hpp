#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thinfilm/jko.hpp"

namespace thinfilm {

/// Too few samples above the floor inside the fit window.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// value ~ amplitude * exp(-rate * t) on [t_lo, t_hi].
struct RateFit {
  std::string quantity;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double rate = 0.0;
  double amplitude = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
  /// In-window samples at or below the floor (or nonpositive), left out.
  std::size_t floor_hits = 0;
  /// In-window samples left out because the series changes sign next to them.
  std::size_t zero_crossings = 0;
};

inline constexpr std::size_t kMinFitSamples = 10;

/// Least squares of log(value) against t over samples in [t_lo, t_hi] with
/// value > floor. Throws InsufficientData below kMinFitSamples.
RateFit fit_rate(std::span<const double> times, std::span<const double> values, double t_lo,
                 double t_hi, double floor, std::string quantity = "series");

struct RateTarget {
  std::string quantity;
  /// Rate the continuous flow attains.
  double target;
  /// Allowed shortfall for discretisation.
  double slack;
};

struct RateCheck {
  RateFit fit;
  double target = 0.0;
  double slack = 0.0;
  bool passed = false;
  /// "fitted", "converged", "insufficient-data" or "floor-dominated".
  std::string status;
};

struct ConvergenceOptions {
  /// Negative selects max(0.5, 500 tau).
  double t_lo = -1.0;
  /// Negative selects the final snapshot time.
  double t_hi = -1.0;
  /// Floor as a fraction of each series' initial magnitude.
  double relative_floor = 1e-10;
  /// A run whose initial H_rel is at most this is reported as already converged.
  double converged_h_rel = 1e-7;
  double h_slack = 0.2;
  double alpha_slack = 0.15;
  double norm11_slack = 0.15;
  double normp1_slack = 0.1;
  double l1_slack = 0.15;
  /// H_rel fits above 2 + h_slack are flagged floor-dominated instead of passing.
  double h_upper_slack = 0.2;
};

struct ConvergenceReport {
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool already_converged = false;
  /// Index of the first step where H_rel increased, 0 when monotone.
  std::size_t first_entropy_increase = 0;
  std::vector<RateCheck> checks;

  bool passed() const;
};

/// Series names: H_rel, alpha_rel_abs, norm11_sq, normp1_sq_<p>, l1_distance.
std::vector<std::string> rate_series_names(std::span<const double> p_values);
/// Series values over the trajectory, in the order of rate_series_names.
std::vector<std::vector<double>> rate_series(const JkoTrajectory& traj,
                                             std::span<const double> p_values);

ConvergenceReport convergence_report(const JkoTrajectory& traj, std::span<const double> p_values,
                                     const ConvergenceOptions& options = {});

}  // namespace thinfilm
