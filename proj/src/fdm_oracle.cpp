#include "thinfilm/fdm_oracle.hpp"

#include "thinfilm/functionals.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace thinfilm {

namespace {

// Face i + 1/2 carries the fourth-order flux iff its third-difference
// stencil i-1..i+2 is on the grid.
bool active_face(std::size_t i, std::size_t n) { return i >= 1 && i + 2 < n; }

// Centred x v on active faces. The short-stencil faces next to each end take
// v from the outer node, upwind for the inward velocity -x, so the end nodes
// drain without going negative.
void advective_flux(const GridDensity& g, std::span<const double> v, std::vector<double>& f) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double xf = g.x(i) + 0.5 * g.dx();
    if (active_face(i, n))
      f[i] = xf * 0.5 * (v[i] + v[i + 1]);
    else
      f[i] = xf * (xf > 0.0 ? v[i + 1] : v[i]);
  }
}

void full_flux(const GridDensity& g, std::span<const double> v, std::vector<double>& f) {
  const std::size_t n = v.size();
  const double dx3 = g.dx() * g.dx() * g.dx();
  advective_flux(g, v, f);
  for (std::size_t i = 1; i + 2 < n; ++i) {
    const double d3 = (v[i + 2] - 3.0 * v[i + 1] + 3.0 * v[i] - v[i - 1]) / dx3;
    f[i] -= 0.5 * (v[i] + v[i + 1]) * d3;
  }
}

double volume(std::size_t i, std::size_t n, double dx) {
  return (i == 0 || i + 1 == n) ? 0.5 * dx : dx;
}

// Wall fluxes: zero, or x v at the end node (inflow). The end nodes own half
// cells, so the walls sit on them.
struct Walls {
  double left = 0.0;
  double right = 0.0;
};

Walls wall_flux(const GridDensity& g, std::span<const double> v, bool inflow) {
  if (!inflow) return {};
  return {g.x_min() * v.front(), g.x_max() * v.back()};
}

void apply_divergence(std::span<const double> f, Walls walls, double dt, double dx,
                      std::vector<double>& v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double right = i + 1 < n ? f[i] : walls.right;
    const double left = i > 0 ? f[i - 1] : walls.left;
    v[i] += dt * (right - left) / volume(i, n, dx);
  }
}

void check_positive(std::span<const double> v, double floor, double time) {
  const auto it = std::min_element(v.begin(), v.end());
  if (*it < floor) {
    std::ostringstream os;
    os << "fdm oracle: value " << *it << " below the positivity floor " << floor << " at t = "
       << time << ", node " << (it - v.begin());
    throw OracleAbort(os.str(), time, *it);
  }
}

}  // namespace

GridDensity integrate(const GridDensity& v0, double t_final, const FdmConfig& config) {
  if (!(t_final >= 0.0) || t_final > config.max_t_final)
    throw std::invalid_argument("fdm oracle: t_final outside [0, max_t_final]");
  if (!(config.positivity_floor > 0.0) || !(config.cfl > 0.0))
    throw std::invalid_argument("fdm oracle: positivity_floor and cfl must be positive");
  const std::size_t n = v0.size();
  const double dx = v0.dx();
  for (std::size_t i = 0; i < n; ++i)
    if (!(v0[i] > config.positivity_floor))
      throw std::invalid_argument("fdm oracle: initial data is not strictly positive");
  if (t_final == 0.0) return v0;

  const bool explicit_scheme = config.scheme == FdmScheme::kExplicitEuler;
  const double x_far = std::max(std::abs(v0.x_min()), std::abs(v0.x_max()));
  const double dt_max =
      explicit_scheme ? config.cfl * std::pow(dx, 4) : 0.1 * dx / std::max(x_far, 1.0);
  double dt = config.dt > 0.0 ? config.dt : dt_max;
  if (dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "fdm oracle: dt = " << dt << " exceeds the stability limit " << dt_max;
    throw std::invalid_argument(os.str());
  }
  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
  dt = t_final / static_cast<double>(steps);

  std::vector<double> v(v0.values().begin(), v0.values().end());
  std::vector<double> f(n - 1, 0.0);

  if (explicit_scheme) {
    for (std::size_t k = 0; k < steps; ++k) {
      const Walls walls = wall_flux(v0, v, config.inflow_walls);
      full_flux(v0, v, f);
      apply_divergence(f, walls, dt, dx, v);
      check_positive(v, config.positivity_floor, static_cast<double>(k + 1) * dt);
    }
    return GridDensity(v0.x_min(), dx, std::move(v));
  }

  // (I + dt Div(a D3)) v_new = v + dt Div(x v), a = face average of the old v.
  using Matrix = Eigen::SparseMatrix<double>;
  const double dx3 = dx * dx * dx;
  Eigen::SparseLU<Matrix> lu;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(9 * n);
    for (std::size_t i = 0; i < n; ++i) entries.emplace_back(i, i, 1.0);
    for (std::size_t i = 1; i + 2 < n; ++i) {
      const double a = 0.5 * (v[i] + v[i + 1]) / dx3;
      const double stencil[4] = {-1.0, 3.0, -3.0, 1.0};  // on i-1 .. i+2
      // Face flux -a D3 enters node i with + and node i+1 with -.
      for (int s = 0; s < 4; ++s) {
        const std::size_t col = i - 1 + static_cast<std::size_t>(s);
        entries.emplace_back(i, col, dt * a * stencil[s] / volume(i, n, dx));
        entries.emplace_back(i + 1, col, -dt * a * stencil[s] / volume(i + 1, n, dx));
      }
    }
    Matrix A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    A.setFromTriplets(entries.begin(), entries.end());
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw OracleAbort("fdm oracle: singular semi-implicit system", k * dt, 0.0);
    const Walls walls = wall_flux(v0, v, config.inflow_walls);
    advective_flux(v0, v, f);
    apply_divergence(f, walls, dt, dx, v);
    for (std::size_t i = 0; i < n; ++i) rhs[static_cast<Eigen::Index>(i)] = v[i];
    const Eigen::VectorXd next = lu.solve(rhs);
    for (std::size_t i = 0; i < n; ++i) v[i] = next[static_cast<Eigen::Index>(i)];
    check_positive(v, config.positivity_floor, static_cast<double>(k + 1) * dt);
  }
  return GridDensity(v0.x_min(), dx, std::move(v));
}

namespace {

// v widened by pad zero samples each side.
GridDensity padded(const GridDensity& v, std::size_t pad) {
  std::vector<double> values(v.size() + 2 * pad, 0.0);
  std::copy(v.values().begin(), v.values().end(), values.begin() + static_cast<long>(pad));
  return GridDensity(v.x_min() - static_cast<double>(pad) * v.dx(), v.dx(), std::move(values));
}

}  // namespace

CrossvalResult crossvalidate(const GridDensity& v0, double t_final, const JkoConfig& jko,
                             const FdmConfig& fdm) {
  CrossvalResult out;
  const GridDensity vf = integrate(v0, t_final, fdm);
  out.fdm_mass_drift = std::abs(vf.mass() - v0.mass()) / v0.mass();

  const SmythHill smyth(v0.mass());
  const JkoTrajectory traj = run(v0, t_final, jko, smyth);
  out.jko_steps = traj.steps();
  const QuantileDensity& q0 = traj.snapshots.front().state;
  const QuantileDensity& qf = traj.snapshots.back().state;
  out.jko_mass_drift = std::abs(qf.mass() - v0.mass()) / v0.mass();

  double reach = 0.0;
  for (const QuantileDensity* q : {&q0, &qf})
    reach = std::max({reach, v0.x_min() - q->front(), q->back() - v0.x_max()});
  const auto pad = static_cast<std::size_t>(std::ceil(std::max(reach, 0.0) / v0.dx())) + 4;
  const GridDensity g0 = padded(v0, pad), gf = padded(vf, pad);
  const GridDensity j0 = quantile_to_grid(q0, g0.x_min(), g0.dx(), g0.size()).density;
  const GridDensity jf = quantile_to_grid(qf, g0.x_min(), g0.dx(), g0.size()).density;
  out.l1_gap = l1_distance(jf, gf);
  out.reconstruction_floor = l1_distance(j0, g0);
  out.fdm_change = l1_distance(gf, g0);
  out.jko_change = l1_distance(jf, j0);
  return out;
}

}  // namespace thinfilm
