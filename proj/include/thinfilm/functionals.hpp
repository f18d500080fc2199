#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thinfilm/density.hpp"

namespace thinfilm {

// Grid forms: centred differences (second-order one-sided at the ends) and
// the trapezoid rule. Integrands involving v^{-1/2} are restricted to {v > 0}.

/// Centred-difference derivative of the samples.
std::vector<double> derivative(std::span<const double> values, double dx);

double alpha(const GridDensity& v);
double beta(const GridDensity& v);
double energy(const GridDensity& v);
double entropy(const GridDensity& v);
/// int |x|^order v dx for a nonnegative even order.
double moment(const GridDensity& v, int order);
double sup_norm(const GridDensity& v);

struct Dissipation {
  /// int (x + sqrt6 (sqrt v)_x)^2 v dx
  double D;
  /// (sqrt6 / 24) int v^{-3/2} v_x^4 dx
  double extra;
};

Dissipation dissipation(const GridDensity& v);
/// int (x + sqrt6 v_x)^2 v dx, the form with v_x in place of (sqrt v)_x.
double literal_dissipation(const GridDensity& v);

// Quantile forms, with h = M / N; see lagrangian.hpp for the discretisation.

double alpha(const QuantileDensity& q);
double beta(const QuantileDensity& q);
double energy(const QuantileDensity& q);
double entropy(const QuantileDensity& q);
double moment(const QuantileDensity& q, int order);
double sup_norm(const QuantileDensity& q);
Dissipation dissipation(const QuantileDensity& q);
double literal_dissipation(const QuantileDensity& q);

/// int (1 + |x|^{2m}) f^2 + int f_x^2 for f sampled on a uniform grid.
double weighted_norm_sq(double x_min, double dx, std::span<const double> f, double m);
/// Same with f = a - b; the grids must coincide.
double weighted_norm_sq(const GridDensity& a, const GridDensity& b, double m);

/// int |a - b| dx on a common grid.
double l1_distance(const GridDensity& a, const GridDensity& b);

struct FunctionalRecord {
  double time = 0.0;
  double E = 0.0;
  double H = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double D = 0.0;
  double D_literal = 0.0;
  double extra_dissipation = 0.0;
  double M4 = 0.0;
  double sup_v = 0.0;
  double E_rel = 0.0;
  double H_rel = 0.0;
  double alpha_rel = 0.0;
  double beta_rel = 0.0;
  double norm11_sq = 0.0;
  double l1_distance = 0.0;
  /// (p, |||v - v_inf|||_{p,1}^2)
  std::vector<std::pair<double, double>> normp1_sq;

  /// Value for p, or NaN when p was not requested.
  double normp1(double p) const;
};

inline const std::vector<double> kDefaultPValues{1.5};

/// All functionals of a quantile state. Scalars use the quantile forms; the
/// norms and the L1 distance use the reconstruction on a window covering both
/// supports, against the closed-form equilibrium sampled on the same grid.
FunctionalRecord record(const QuantileDensity& q, double time, const SmythHill& smyth,
                        std::span<const double> p_values = kDefaultPValues);
FunctionalRecord record(const GridDensity& v, double time, const SmythHill& smyth,
                        std::span<const double> p_values = kDefaultPValues);

/// Relative mass mismatch accepted by record() and the inequality checks.
inline constexpr double kMassTolerance = 1e-8;
void require_matching_mass(double mass, const SmythHill& smyth, const char* where);

std::vector<std::string> record_columns(std::span<const double> p_values);
std::vector<double> record_values(const FunctionalRecord& r);

}  // namespace thinfilm
