#include "thinfilm/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace thinfilm {

namespace {

double trapezoid(std::span<const double> v, double dx) {
  if (v.size() < 2) return 0.0;
  double sum = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) sum += v[i];
  return sum * dx;
}

}  // namespace

GridDensity::GridDensity(double x_min, double dx, std::vector<double> values)
    : x_min_(x_min), dx_(dx), values_(std::move(values)), mass_(0.0) {
  if (!(dx_ > 0.0) || !std::isfinite(dx_) || !std::isfinite(x_min_))
    throw std::invalid_argument("GridDensity: dx must be positive and finite");
  if (values_.size() < kMinSamples)
    throw std::invalid_argument("GridDensity: need at least 8 samples, got " +
                                std::to_string(values_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
      throw std::invalid_argument("GridDensity: sample " + std::to_string(i) +
                                  " is negative or not finite");
  }
  mass_ = trapezoid(values_, dx_);
  if (!(mass_ > 0.0)) throw std::invalid_argument("GridDensity: mass must be positive");
}

bool GridDensity::same_grid(const GridDensity& other, double rel_tol) const noexcept {
  if (size() != other.size()) return false;
  const double scale = std::max({std::abs(x_min_), std::abs(x_max()), dx_});
  return std::abs(dx_ - other.dx_) <= rel_tol * dx_ &&
         std::abs(x_min_ - other.x_min_) <= rel_tol * scale;
}

GridDensity GridDensity::sample(const std::function<double(double)>& f, double x_min, double dx,
                                std::size_t count) {
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = f(x_min + dx * static_cast<double>(i));
  return GridDensity(x_min, dx, std::move(values));
}

QuantileDensity::QuantileDensity(double mass, std::vector<double> positions)
    : mass_(mass), positions_(std::move(positions)) {
  if (!(mass_ > 0.0) || !std::isfinite(mass_))
    throw std::invalid_argument("QuantileDensity: mass must be positive");
  if (positions_.size() < 2) throw std::invalid_argument("QuantileDensity: need two positions");
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (!std::isfinite(positions_[i]))
      throw std::invalid_argument("QuantileDensity: position " + std::to_string(i) +
                                  " is not finite");
    if (i > 0 && !(positions_[i] > positions_[i - 1]))
      throw std::invalid_argument("QuantileDensity: positions must be strictly increasing at " +
                                  std::to_string(i));
  }
}

double QuantileDensity::min_gap() const noexcept {
  double gap = positions_[1] - positions_[0];
  for (std::size_t i = 2; i < positions_.size(); ++i)
    gap = std::min(gap, positions_[i] - positions_[i - 1]);
  return gap;
}

QuantileDensity QuantileDensity::translated(double d) const {
  std::vector<double> x(positions_);
  for (double& xi : x) xi += d;
  return QuantileDensity(mass_, std::move(x));
}

// ---------------------------------------------------------------------------
// Smyth-Hill profile

SmythHill::SmythHill(double mass) : mass_(mass), radius_(0.0) {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::invalid_argument("smyth_hill: mass must be positive");
  // int (C^2 - x^2)^2 / 24 dx = 2 C^5 / 45
  radius_ = std::pow(45.0 * mass / 2.0, 0.2);
}

SmythHill smyth_hill(double mass) { return SmythHill(mass); }

double SmythHill::value(double x) const noexcept {
  const double q = radius_ * radius_ - x * x;
  return q > 0.0 ? q * q / 24.0 : 0.0;
}

double SmythHill::derivative(double x) const noexcept {
  const double q = radius_ * radius_ - x * x;
  return q > 0.0 ? -x * q / 6.0 : 0.0;
}

double SmythHill::second_derivative(double x) const noexcept {
  const double c2 = radius_ * radius_;
  return x * x < c2 ? (3.0 * x * x - c2) / 6.0 : 0.0;
}

double SmythHill::third_derivative(double x) const noexcept {
  return x * x < radius_ * radius_ ? x : 0.0;
}

double SmythHill::cdf(double x) const noexcept {
  const double c = radius_;
  const double y = std::clamp(x, -c, c);
  const double c2 = c * c;
  auto antiderivative = [c2](double t) {
    const double t2 = t * t;
    return t * (c2 * c2 - 2.0 * c2 * t2 / 3.0 + t2 * t2 / 5.0) / 24.0;
  };
  return antiderivative(y) - antiderivative(-c);
}

double SmythHill::quantile(double s) const {
  if (!(s >= 0.0 && s <= mass_)) throw std::invalid_argument("SmythHill::quantile: s outside [0, M]");
  double lo = -radius_, hi = radius_;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * radius_; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < s)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double v = value(x);
    if (v <= 0.0) break;
    const double next = x - (cdf(x) - s) / v;
    if (next <= lo || next >= hi) break;
    x = next;
  }
  return x;
}

QuantileDensity SmythHill::quantiles(std::size_t n) const {
  if (n < 2) throw std::invalid_argument("SmythHill::quantiles: n must be at least 2");
  std::vector<double> x(n);
  const double h = mass_ / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = quantile((static_cast<double>(i) + 0.5) * h);
  return QuantileDensity(mass_, std::move(x));
}

GridDensity SmythHill::sample(double x_min, double dx, std::size_t count) const {
  return GridDensity::sample([this](double x) { return value(x); }, x_min, dx, count);
}

double SmythHill::peak() const noexcept { return std::pow(radius_, 4) / 24.0; }
double SmythHill::alpha() const noexcept { return std::pow(radius_, 7) / 315.0; }
double SmythHill::beta() const noexcept { return 2.0 * std::pow(radius_, 7) / 945.0; }
double SmythHill::energy() const noexcept { return std::pow(radius_, 7) / 189.0; }
double SmythHill::entropy() const noexcept { return std::pow(radius_, 7) / 63.0; }
double SmythHill::fourth_moment() const noexcept { return 2.0 * std::pow(radius_, 9) / 945.0; }
double SmythHill::extra_dissipation() const noexcept { return std::pow(radius_, 7) / 945.0; }
double SmythHill::l2_norm_sq() const noexcept {
  // int (C^2 - x^2)^4 dx = 256 C^9 / 315
  return 256.0 * std::pow(radius_, 9) / (315.0 * 576.0);
}

// ---------------------------------------------------------------------------
// Conversions

QuantileDensity grid_to_quantile(const GridDensity& v, std::size_t n) {
  if (n < 8) throw std::invalid_argument("grid_to_quantile: n must be at least 8");
  const auto values = v.values();
  const double dx = v.dx();
  std::vector<double> cdf(values.size(), 0.0);
  for (std::size_t j = 1; j < values.size(); ++j)
    cdf[j] = cdf[j - 1] + 0.5 * dx * (values[j - 1] + values[j]);
  const double mass = cdf.back();
  if (!(mass > 0.0)) throw std::invalid_argument("grid_to_quantile: zero mass");

  std::vector<double> x(n);
  const double h = mass / static_cast<double>(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * h;
    while (j + 2 < cdf.size() && cdf[j + 1] < s) ++j;
    const double inc = cdf[j + 1] - cdf[j];
    const double frac = inc > 0.0 ? (s - cdf[j]) / inc : 0.5;
    x[i] = v.x(j) + frac * dx;
  }
  return QuantileDensity(mass, std::move(x));
}

std::vector<double> nodal_density(const QuantileDensity& q) {
  const auto x = q.positions();
  const double h = q.cell_mass();
  std::vector<double> v(x.size(), 0.0);
  for (std::size_t i = 1; i + 1 < x.size(); ++i) v[i] = 2.0 * h / (x[i + 1] - x[i - 1]);
  return v;
}

Reconstruction quantile_to_grid(const QuantileDensity& q, double x_min, double dx,
                                std::size_t count) {
  if (!(dx > 0.0) || count < GridDensity::kMinSamples)
    throw std::invalid_argument("quantile_to_grid: invalid grid");
  const double x_max = x_min + dx * static_cast<double>(count - 1);
  if (q.front() - x_min < 2.0 * dx || x_max - q.back() < 2.0 * dx)
    throw std::invalid_argument("quantile_to_grid: window does not cover the support with margin");

  const auto x = q.positions();
  const auto nodes = nodal_density(q);
  std::vector<double> values(count, 0.0);
  std::size_t k = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const double xj = x_min + dx * static_cast<double>(j);
    if (xj <= x.front() || xj >= x.back()) continue;
    while (k + 2 < x.size() && x[k + 1] < xj) ++k;
    const double t = (xj - x[k]) / (x[k + 1] - x[k]);
    values[j] = std::max(0.0, (1.0 - t) * nodes[k] + t * nodes[k + 1]);
  }
  const double raw = trapezoid(values, dx);
  if (!(raw > 0.0))
    throw std::invalid_argument("quantile_to_grid: grid too coarse to resolve the support");
  const double factor = q.mass() / raw;
  for (double& vj : values) vj *= factor;
  return Reconstruction{GridDensity(x_min, dx, std::move(values)), factor};
}

Reconstruction quantile_to_grid_window(const QuantileDensity& q, double lo, double hi,
                                       std::size_t count) {
  constexpr double kPadCells = 3.0;
  if (count < GridDensity::kMinSamples + 8)
    throw std::invalid_argument("quantile_to_grid_window: count too small");
  const double a = std::min(lo, q.front());
  const double b = std::max(hi, q.back());
  const double dx = (b - a) / (static_cast<double>(count - 1) - 2.0 * kPadCells);
  return quantile_to_grid(q, a - kPadCells * dx, dx, count);
}

Rescaled rescale_u_to_v(const GridDensity& u, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("rescale_u_to_v: t must be nonnegative");
  const double a = std::exp(t);
  std::vector<double> values(u.values().begin(), u.values().end());
  for (double& v : values) v *= a;
  return Rescaled{GridDensity(u.x_min() / a, u.dx() / a, std::move(values)),
                  std::expm1(5.0 * t) / 5.0};
}

Rescaled rescale_v_to_u(const GridDensity& v, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("rescale_v_to_u: t must be nonnegative");
  const double a = std::exp(t);
  std::vector<double> values(v.values().begin(), v.values().end());
  for (double& u : values) u /= a;
  return Rescaled{GridDensity(v.x_min() * a, v.dx() * a, std::move(values)),
                  std::expm1(5.0 * t) / 5.0};
}

}  // namespace thinfilm
