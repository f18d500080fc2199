#include "thinfilm/lagrangian.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace thinfilm::lagrangian {

void Band5::zero() {
  std::fill(diag_.begin(), diag_.end(), 0.0);
  std::fill(off1_.begin(), off1_.end(), 0.0);
  std::fill(off2_.begin(), off2_.end(), 0.0);
}

void Band5::add(std::size_t i, std::size_t j, double value) {
  if (i > j) std::swap(i, j);
  switch (j - i) {
    case 0: diag_[i] += value; break;
    case 1: off1_[i] += value; break;
    case 2: off2_[i] += value; break;
    default: throw std::out_of_range("Band5::add outside the band");
  }
}

void Band5::add_identity(double value) {
  for (double& d : diag_) d += value;
}

double Band5::at(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  switch (j - i) {
    case 0: return diag_[i];
    case 1: return off1_[i];
    case 2: return off2_[i];
    default: return 0.0;
  }
}

// L stored over the same arrays: diag_[i] = L_ii, off1_[i] = L_{i+1,i},
// off2_[i] = L_{i+2,i}.
bool Band5::factorize() {
  const std::size_t n = diag_.size();
  for (std::size_t i = 0; i < n; ++i) {
    double d = diag_[i];
    if (i >= 1) d -= off1_[i - 1] * off1_[i - 1];
    if (i >= 2) d -= off2_[i - 2] * off2_[i - 2];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double lii = std::sqrt(d);
    diag_[i] = lii;
    if (i + 1 < n) {
      double a = off1_[i];
      if (i >= 1) a -= off2_[i - 1] * off1_[i - 1];
      off1_[i] = a / lii;
    }
    if (i + 2 < n) off2_[i] = off2_[i] / lii;
  }
  return true;
}

void Band5::solve(std::span<double> b) const {
  const std::size_t n = diag_.size();
  assert(b.size() == n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = b[i];
    if (i >= 1) r -= off1_[i - 1] * b[i - 1];
    if (i >= 2) r -= off2_[i - 2] * b[i - 2];
    b[i] = r / diag_[i];
  }
  for (std::size_t k = n; k-- > 0;) {
    double r = b[k];
    if (k + 1 < n) r -= off1_[k] * b[k + 1];
    if (k + 2 < n) r -= off2_[k] * b[k + 2];
    b[k] = r / diag_[k];
  }
}

namespace {

// T(a, b) = h^2 (1/a - 1/b)^2 / (a + b): the surface energy between the
// centres of two adjacent cells of widths a and b.
struct PairTerm {
  double value, da, db, daa, dab, dbb;
};

PairTerm pair_term(double a, double b, double h2) {
  const double g = 1.0 / a - 1.0 / b;
  const double s = a + b;
  const double ga = -1.0 / (a * a), gb = 1.0 / (b * b);
  const double gaa = 2.0 / (a * a * a), gbb = -2.0 / (b * b * b);
  const double s2 = s * s, s3 = s2 * s;
  PairTerm t;
  t.value = h2 * g * g / s;
  t.da = h2 * (2.0 * g * ga / s - g * g / s2);
  t.db = h2 * (2.0 * g * gb / s - g * g / s2);
  t.daa = h2 * (2.0 * (ga * ga + g * gaa) / s - 4.0 * g * ga / s2 + 2.0 * g * g / s3);
  t.dbb = h2 * (2.0 * (gb * gb + g * gbb) / s - 4.0 * g * gb / s2 + 2.0 * g * g / s3);
  t.dab = h2 * (2.0 * ga * gb / s - 2.0 * g * (ga + gb) / s2 + 2.0 * g * g / s3);
  return t;
}

double edge_three_halves_coeff(double h) {
  return kThreeHalves * std::pow(1.5 * h, 1.5) * std::sqrt(kEdgeRatio) / 4.0;
}

void require_cells(std::span<const double> x) {
  if (x.size() < 4) throw std::invalid_argument("lagrangian: need at least 4 positions");
}

}  // namespace

double alpha(std::span<const double> x, double h) {
  double sum = 0.0;
  for (double xi : x) sum += xi * xi;
  return 0.5 * h * sum;
}

double fourth_moment(std::span<const double> x, double h) {
  double sum = 0.0;
  for (double xi : x) sum += xi * xi * xi * xi;
  return h * sum;
}

double beta(std::span<const double> x, double h) {
  require_cells(x);
  const std::size_t cells = x.size() - 1;
  const double h2 = h * h;
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < cells; ++k)
    sum += pair_term(x[k + 1] - x[k], x[k + 2] - x[k + 1], h2).value;
  const double w0 = x[1] - x[0], wl = x[cells] - x[cells - 1];
  sum += kBetaEdge * h2 * (1.0 / (w0 * w0 * w0) + 1.0 / (wl * wl * wl));
  return sum;
}

double three_halves(std::span<const double> x, double h) {
  require_cells(x);
  const std::size_t cells = x.size() - 1;
  double sum = 0.0;
  for (std::size_t k = 0; k < cells; ++k) sum += 1.0 / std::sqrt(x[k + 1] - x[k]);
  const double interior = kThreeHalves * std::pow(h, 1.5) * sum;
  const double edges = edge_three_halves_coeff(h) *
                       (1.0 / std::sqrt(x[1] - x[0]) + 1.0 / std::sqrt(x[cells] - x[cells - 1]));
  return interior + edges;
}

double sup(std::span<const double> x, double h) {
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) best = std::max(best, h / (x[k + 1] - x[k]));
  return best;
}

void energy_gradient(std::span<const double> x, double h, std::span<double> grad) {
  require_cells(x);
  assert(grad.size() == x.size());
  const std::size_t cells = x.size() - 1;
  const double h2 = h * h;
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] = h * x[i];
  for (std::size_t k = 0; k + 1 < cells; ++k) {
    const PairTerm t = pair_term(x[k + 1] - x[k], x[k + 2] - x[k + 1], h2);
    grad[k] -= t.da;
    grad[k + 1] += t.da - t.db;
    grad[k + 2] += t.db;
  }
  const double w0 = x[1] - x[0], wl = x[cells] - x[cells - 1];
  const double d0 = -3.0 * kBetaEdge * h2 / (w0 * w0 * w0 * w0);
  const double dl = -3.0 * kBetaEdge * h2 / (wl * wl * wl * wl);
  grad[0] -= d0;
  grad[1] += d0;
  grad[cells - 1] -= dl;
  grad[cells] += dl;
}

void energy_hessian(std::span<const double> x, double h, Band5& hess) {
  require_cells(x);
  assert(hess.size() == x.size());
  const std::size_t cells = x.size() - 1;
  const double h2 = h * h;
  hess.zero();
  hess.add_identity(h);
  for (std::size_t k = 0; k + 1 < cells; ++k) {
    const PairTerm t = pair_term(x[k + 1] - x[k], x[k + 2] - x[k + 1], h2);
    hess.add(k, k, t.daa);
    hess.add(k, k + 1, t.dab - t.daa);
    hess.add(k, k + 2, -t.dab);
    hess.add(k + 1, k + 1, t.daa - 2.0 * t.dab + t.dbb);
    hess.add(k + 1, k + 2, t.dab - t.dbb);
    hess.add(k + 2, k + 2, t.dbb);
  }
  auto single = [&](std::size_t k, double w) {
    const double f2 = 12.0 * kBetaEdge * h2 / (w * w * w * w * w);
    hess.add(k, k, f2);
    hess.add(k + 1, k + 1, f2);
    hess.add(k, k + 1, -f2);
  };
  single(0, x[1] - x[0]);
  single(cells - 1, x[cells] - x[cells - 1]);
}

void entropy_gradient(std::span<const double> x, double h, std::span<double> grad) {
  require_cells(x);
  assert(grad.size() == x.size());
  const std::size_t cells = x.size() - 1;
  const double c = kThreeHalves * std::pow(h, 1.5);
  const double ce = edge_three_halves_coeff(h);
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] = h * x[i];
  for (std::size_t k = 0; k < cells; ++k) {
    const double w = x[k + 1] - x[k];
    double coeff = c;
    if (k == 0) coeff += ce;
    if (k + 1 == cells) coeff += ce;
    // d/dw (coeff w^{-1/2})
    const double dw = -0.5 * coeff / (w * std::sqrt(w));
    grad[k] -= dw;
    grad[k + 1] += dw;
  }
}

double dissipation(std::span<const double> x, double h) {
  require_cells(x);
  const std::size_t n = x.size();
  const double s6 = std::sqrt(6.0);
  // sqrt6 (sqrt v)_x at node i: sqrt(2/3) (rho_i^{3/2} - rho_{i-1}^{3/2}) / h,
  // the velocity of the interior three-halves sum.
  const double c = 0.5 * kThreeHalves / h;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double drift;
    if (i == 0 || i + 1 == n) {
      // v = a z^2 with a z_0^3 / 3 = h / 2, so sqrt6 (sqrt v)_x = sqrt(6 a).
      const double w = i == 0 ? x[1] - x[0] : x[n - 1] - x[n - 2];
      const double z0 = w / kEdgeRatio;
      const double a = 1.5 * h / (z0 * z0 * z0);
      drift = (i == 0 ? 1.0 : -1.0) * s6 * std::sqrt(a);
    } else {
      const double rl = h / (x[i] - x[i - 1]), rr = h / (x[i + 1] - x[i]);
      drift = c * (rr * std::sqrt(rr) - rl * std::sqrt(rl));
    }
    const double u = x[i] + drift;
    sum += u * u;
  }
  return h * sum;
}

double literal_dissipation(std::span<const double> x, double h) {
  require_cells(x);
  const std::size_t n = x.size();
  const double s6 = std::sqrt(6.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double vx;
    if (i == 0) {
      const double z0 = (x[1] - x[0]) / kEdgeRatio;
      vx = 3.0 * h / (z0 * z0);
    } else if (i + 1 == n) {
      const double z0 = (x[n - 1] - x[n - 2]) / kEdgeRatio;
      vx = -3.0 * h / (z0 * z0);
    } else {
      const double wl = x[i] - x[i - 1], wr = x[i + 1] - x[i];
      vx = (h / wr - h / wl) / (0.5 * (wl + wr));
    }
    const double r = x[i] + s6 * vx;
    sum += r * r;
  }
  return h * sum;
}

double extra_dissipation(std::span<const double> x, double h) {
  require_cells(x);
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double wl = x[i] - x[i - 1], wr = x[i + 1] - x[i];
    const double d = 0.5 * (wl + wr);
    const double vx = (h / wr - h / wl) / d;
    const double v = 0.5 * (h / wl + h / wr);
    const double vx2 = vx * vx;
    sum += d * vx2 * vx2 / (v * std::sqrt(v));
  }
  // From each edge to the middle of the end cell under v = a z^2, where the
  // integrand is 16 a^{5/2} z and a z0^3 / 3 = h / 2.
  const std::size_t last = x.size() - 1;
  for (double w0 : {x[1] - x[0], x[last] - x[last - 1]}) {
    const double z0 = w0 / kEdgeRatio;
    const double a = 1.5 * h / (z0 * z0 * z0);
    const double reach = z0 + 0.5 * w0;
    sum += 8.0 * std::pow(a, 2.5) * reach * reach;
  }
  return std::sqrt(6.0) / 24.0 * sum;
}

}  // namespace thinfilm::lagrangian
