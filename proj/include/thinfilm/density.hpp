#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace thinfilm {

/// Density sampled on a uniform grid x_i = x_min + i*dx.
///
/// Values are nonnegative, there are at least 8 of them, and the mass is the
/// trapezoid quadrature of the samples.
class GridDensity {
 public:
  static constexpr std::size_t kMinSamples = 8;

  GridDensity(double x_min, double dx, std::vector<double> values);

  double x_min() const noexcept { return x_min_; }
  double dx() const noexcept { return dx_; }
  double x_max() const noexcept { return x(values_.size() - 1); }
  double x(std::size_t i) const noexcept { return x_min_ + dx_ * static_cast<double>(i); }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double mass() const noexcept { return mass_; }

  /// True when both grids share x_min, dx and sample count.
  bool same_grid(const GridDensity& other, double rel_tol = 1e-12) const noexcept;

  /// Samples f on the grid. Negative samples are rejected, not clipped.
  static GridDensity sample(const std::function<double(double)>& f, double x_min, double dx,
                            std::size_t count);

 private:
  double x_min_;
  double dx_;
  std::vector<double> values_;
  double mass_;
};

/// Lagrangian representation: positions X_i of the quantile function at the
/// cell-centred mass fractions s_i = (i + 1/2) M / N.
class QuantileDensity {
 public:
  QuantileDensity(double mass, std::vector<double> positions);

  double mass() const noexcept { return mass_; }
  std::size_t size() const noexcept { return positions_.size(); }
  std::span<const double> positions() const noexcept { return positions_; }
  double operator[](std::size_t i) const noexcept { return positions_[i]; }
  /// Mass carried by each quantile cell, M/N.
  double cell_mass() const noexcept { return mass_ / static_cast<double>(positions_.size()); }
  double fraction(std::size_t i) const noexcept {
    return (static_cast<double>(i) + 0.5) * cell_mass();
  }
  double front() const noexcept { return positions_.front(); }
  double back() const noexcept { return positions_.back(); }
  double min_gap() const noexcept;

  QuantileDensity translated(double d) const;

 private:
  double mass_;
  std::vector<double> positions_;
};

/// Smyth-Hill equilibrium v(x) = (C^2 - x^2)_+^2 / 24 with C fixed by the mass.
class SmythHill {
 public:
  explicit SmythHill(double mass);

  double mass() const noexcept { return mass_; }
  double support_radius() const noexcept { return radius_; }

  double value(double x) const noexcept;
  double derivative(double x) const noexcept;
  double second_derivative(double x) const noexcept;
  /// Equals x on (-C, C).
  double third_derivative(double x) const noexcept;
  double cdf(double x) const noexcept;
  /// Inverse of cdf on (0, M); Newton polished bisection, accurate to ~1e-15.
  double quantile(double s) const;

  QuantileDensity quantiles(std::size_t n) const;
  GridDensity sample(double x_min, double dx, std::size_t count) const;

  // Closed-form functionals, all proportional to a power of C.
  double peak() const noexcept;
  double alpha() const noexcept;
  double beta() const noexcept;
  double energy() const noexcept;
  double entropy() const noexcept;
  double fourth_moment() const noexcept;
  double extra_dissipation() const noexcept;
  double l2_norm_sq() const noexcept;

 private:
  double mass_;
  double radius_;
};

SmythHill smyth_hill(double mass);

/// Piecewise-linear inversion of the trapezoid CDF at s_i = (i + 1/2) M / n.
QuantileDensity grid_to_quantile(const GridDensity& v, std::size_t n);

struct Reconstruction {
  GridDensity density;
  /// Factor the raw interpolant was multiplied by to restore the mass.
  double renormalization;
};

/// Nodal density values at the quantile positions: 2h / (X_{i+1} - X_{i-1})
/// in the interior and 0 at the two end nodes.
std::vector<double> nodal_density(const QuantileDensity& q);

/// Piecewise-linear interpolant of nodal_density on the given grid, zero
/// outside [X_0, X_{N-1}], renormalised to the quantile mass. The window must
/// cover the support with a margin of at least two cells.
Reconstruction quantile_to_grid(const QuantileDensity& q, double x_min, double dx,
                                std::size_t count);

/// Same, on a window [lo - pad, hi + pad] chosen to contain both the support
/// and [lo, hi].
Reconstruction quantile_to_grid_window(const QuantileDensity& q, double lo, double hi,
                                       std::size_t count);

struct Rescaled {
  GridDensity density;
  /// b(t) = (e^{5t} - 1) / 5, the time of the unscaled flow.
  double clock;
};

/// v(x) = a u(a x) with a = e^t.
Rescaled rescale_u_to_v(const GridDensity& u, double t);
/// u(y) = v(y / a) / a with a = e^t; inverse of rescale_u_to_v.
Rescaled rescale_v_to_u(const GridDensity& v, double t);

}  // namespace thinfilm
