#include "thinfilm/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "thinfilm/lagrangian.hpp"

namespace thinfilm {

namespace {

const double kSqrt6 = std::sqrt(6.0);

template <class F>
double trapezoid_of(std::size_t n, double dx, F&& f) {
  double sum = 0.5 * (f(0) + f(n - 1));
  for (std::size_t i = 1; i + 1 < n; ++i) sum += f(i);
  return sum * dx;
}

void require_grid(std::size_t n) {
  if (n < GridDensity::kMinSamples)
    throw std::invalid_argument("functionals: fewer than 8 samples");
}

}  // namespace

void require_matching_mass(double mass, const SmythHill& smyth, const char* where) {
  if (std::abs(mass - smyth.mass()) > kMassTolerance * smyth.mass()) {
    std::ostringstream os;
    os << where << ": mass " << mass << " does not match the equilibrium mass " << smyth.mass();
    throw std::invalid_argument(os.str());
  }
}

std::vector<double> derivative(std::span<const double> v, double dx) {
  const std::size_t n = v.size();
  require_grid(n);
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx);
  return d;
}

// ---------------------------------------------------------------------------
// Grid forms

double alpha(const GridDensity& v) {
  return 0.5 * trapezoid_of(v.size(), v.dx(), [&](std::size_t i) {
           const double x = v.x(i);
           return x * x * v[i];
         });
}

double beta(const GridDensity& v) {
  const auto vx = derivative(v.values(), v.dx());
  return 0.5 * trapezoid_of(v.size(), v.dx(), [&](std::size_t i) { return vx[i] * vx[i]; });
}

double energy(const GridDensity& v) { return alpha(v) + beta(v); }

double entropy(const GridDensity& v) {
  const double c = lagrangian::kThreeHalves;
  return alpha(v) + c * trapezoid_of(v.size(), v.dx(), [&](std::size_t i) {
           return v[i] * std::sqrt(v[i]);
         });
}

double moment(const GridDensity& v, int order) {
  if (order < 0 || order % 2 != 0)
    throw std::invalid_argument("moment: order must be a nonnegative even integer");
  return trapezoid_of(v.size(), v.dx(), [&](std::size_t i) {
    return std::pow(v.x(i), order) * v[i];
  });
}

double sup_norm(const GridDensity& v) {
  return *std::max_element(v.values().begin(), v.values().end());
}

Dissipation dissipation(const GridDensity& v) {
  const auto vx = derivative(v.values(), v.dx());
  // (x + sqrt6 v_x / (2 sqrt v))^2 v = x^2 v + sqrt6 x v_x sqrt v + 1.5 v_x^2 on {v > 0}
  const double D = trapezoid_of(v.size(), v.dx(), [&](std::size_t i) {
    if (!(v[i] > 0.0)) return 0.0;
    const double x = v.x(i);
    return x * x * v[i] + kSqrt6 * x * vx[i] * std::sqrt(v[i]) + 1.5 * vx[i] * vx[i];
  });
  const double extra = kSqrt6 / 24.0 * trapezoid_of(v.size(), v.dx(), [&](std::size_t i) {
                         if (!(v[i] > 0.0)) return 0.0;
                         const double q = vx[i] * vx[i];
                         return q * q / (v[i] * std::sqrt(v[i]));
                       });
  return Dissipation{D, extra};
}

double literal_dissipation(const GridDensity& v) {
  const auto vx = derivative(v.values(), v.dx());
  return trapezoid_of(v.size(), v.dx(), [&](std::size_t i) {
    const double r = v.x(i) + kSqrt6 * vx[i];
    return r * r * v[i];
  });
}

// ---------------------------------------------------------------------------
// Quantile forms

double alpha(const QuantileDensity& q) { return lagrangian::alpha(q.positions(), q.cell_mass()); }
double beta(const QuantileDensity& q) { return lagrangian::beta(q.positions(), q.cell_mass()); }
double energy(const QuantileDensity& q) { return lagrangian::energy(q.positions(), q.cell_mass()); }
double entropy(const QuantileDensity& q) {
  return lagrangian::entropy(q.positions(), q.cell_mass());
}

double moment(const QuantileDensity& q, int order) {
  if (order < 0 || order % 2 != 0)
    throw std::invalid_argument("moment: order must be a nonnegative even integer");
  double sum = 0.0;
  for (double x : q.positions()) sum += std::pow(x, order);
  return q.cell_mass() * sum;
}

double sup_norm(const QuantileDensity& q) { return lagrangian::sup(q.positions(), q.cell_mass()); }

Dissipation dissipation(const QuantileDensity& q) {
  return Dissipation{lagrangian::dissipation(q.positions(), q.cell_mass()),
                     lagrangian::extra_dissipation(q.positions(), q.cell_mass())};
}

double literal_dissipation(const QuantileDensity& q) {
  return lagrangian::literal_dissipation(q.positions(), q.cell_mass());
}

// ---------------------------------------------------------------------------
// Norms

double weighted_norm_sq(double x_min, double dx, std::span<const double> f, double m) {
  if (!(m >= 0.0 && m <= 2.0)) throw std::invalid_argument("weighted_norm_sq: m outside [0, 2]");
  if (!(dx > 0.0)) throw std::invalid_argument("weighted_norm_sq: dx must be positive");
  const auto fx = derivative(f, dx);
  return trapezoid_of(f.size(), dx, [&](std::size_t i) {
    const double x = x_min + dx * static_cast<double>(i);
    return (1.0 + std::pow(std::abs(x), 2.0 * m)) * f[i] * f[i] + fx[i] * fx[i];
  });
}

double weighted_norm_sq(const GridDensity& a, const GridDensity& b, double m) {
  if (!a.same_grid(b)) throw std::invalid_argument("weighted_norm_sq: grids differ");
  std::vector<double> f(a.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = a[i] - b[i];
  return weighted_norm_sq(a.x_min(), a.dx(), f, m);
}

double l1_distance(const GridDensity& a, const GridDensity& b) {
  if (!a.same_grid(b)) throw std::invalid_argument("l1_distance: grids differ");
  return trapezoid_of(a.size(), a.dx(), [&](std::size_t i) { return std::abs(a[i] - b[i]); });
}

// ---------------------------------------------------------------------------
// Records

double FunctionalRecord::normp1(double p) const {
  for (const auto& [pp, value] : normp1_sq)
    if (std::abs(pp - p) < 1e-12) return value;
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

void fill_relative(FunctionalRecord& r, const SmythHill& smyth) {
  r.alpha_rel = r.alpha - smyth.alpha();
  r.beta_rel = r.beta - smyth.beta();
  r.E = r.alpha + r.beta;
  r.E_rel = r.alpha_rel + r.beta_rel;
  r.H_rel = r.H - smyth.entropy();
}

void fill_norms(FunctionalRecord& r, const GridDensity& v, const SmythHill& smyth,
                std::span<const double> p_values) {
  const GridDensity ref = smyth.sample(v.x_min(), v.dx(), v.size());
  r.norm11_sq = weighted_norm_sq(v, ref, 1.0);
  r.l1_distance = l1_distance(v, ref);
  r.normp1_sq.clear();
  for (double p : p_values) r.normp1_sq.emplace_back(p, weighted_norm_sq(v, ref, p));
}

}  // namespace

FunctionalRecord record(const QuantileDensity& q, double time, const SmythHill& smyth,
                        std::span<const double> p_values) {
  require_matching_mass(q.mass(), smyth, "record");
  FunctionalRecord r;
  r.time = time;
  r.alpha = alpha(q);
  r.beta = beta(q);
  r.H = entropy(q);
  const Dissipation d = dissipation(q);
  r.D = d.D;
  r.extra_dissipation = d.extra;
  r.D_literal = literal_dissipation(q);
  r.M4 = moment(q, 4);
  r.sup_v = sup_norm(q);
  fill_relative(r, smyth);

  const double c = smyth.support_radius();
  const std::size_t count = std::max<std::size_t>(2001, 8 * q.size() + 1);
  const Reconstruction rec = quantile_to_grid_window(q, -c, c, count);
  fill_norms(r, rec.density, smyth, p_values);
  return r;
}

FunctionalRecord record(const GridDensity& v, double time, const SmythHill& smyth,
                        std::span<const double> p_values) {
  require_matching_mass(v.mass(), smyth, "record");
  FunctionalRecord r;
  r.time = time;
  r.alpha = alpha(v);
  r.beta = beta(v);
  r.H = entropy(v);
  const Dissipation d = dissipation(v);
  r.D = d.D;
  r.extra_dissipation = d.extra;
  r.D_literal = literal_dissipation(v);
  r.M4 = moment(v, 4);
  r.sup_v = sup_norm(v);
  fill_relative(r, smyth);
  fill_norms(r, v, smyth, p_values);
  return r;
}

std::vector<std::string> record_columns(std::span<const double> p_values) {
  std::vector<std::string> cols{"time",      "E",       "H",         "alpha",    "beta",
                                "D",         "D_literal", "extra_dissipation", "M4",
                                "sup_v",     "E_rel",   "H_rel",     "alpha_rel", "beta_rel",
                                "norm11_sq", "l1_distance"};
  for (double p : p_values) {
    std::ostringstream os;
    os << "normp1_sq_" << p;
    cols.push_back(os.str());
  }
  return cols;
}

std::vector<double> record_values(const FunctionalRecord& r) {
  std::vector<double> v{r.time,  r.E,         r.H,     r.alpha,       r.beta,
                        r.D,     r.D_literal, r.extra_dissipation, r.M4,
                        r.sup_v, r.E_rel,     r.H_rel, r.alpha_rel,   r.beta_rel,
                        r.norm11_sq, r.l1_distance};
  for (const auto& [p, value] : r.normp1_sq) v.push_back(value);
  return v;
}

}  // namespace thinfilm
