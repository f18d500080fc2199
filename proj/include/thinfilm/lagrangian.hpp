#pragma once

// Quantile-form (Lagrangian) discretisation of the functionals.
//
// Positions X_0 < ... < X_{N-1} carry mass h each. Cell k = [X_k, X_{k+1}]
// has width w_k and density rho_k = h / w_k. The half cells beyond X_0 and
// X_{N-1} are closed with the quadratic vanishing profile v ~ a z^2 that a
// minimiser has at a support edge, which fixes w_0 = (3^{1/3} - 1) z_0 with
// z_0 the distance from X_0 to the edge.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace thinfilm::lagrangian {

/// w_0 / z_0 for the quadratic edge profile.
inline const double kEdgeRatio = std::cbrt(3.0) - 1.0;
/// beta edge term coefficient: int_edge^{centre of cell 0} v_x^2 / 2 = c h^2 / w_0^3.
inline const double kBetaEdge =
    1.5 * std::pow(0.5 * (1.0 + std::cbrt(3.0)), 3) * std::pow(kEdgeRatio, 3);
/// 2 sqrt(2/3)
inline const double kThreeHalves = 2.0 * std::sqrt(2.0 / 3.0);

/// Symmetric pentadiagonal matrix with an in-place banded Cholesky factorisation.
class Band5 {
 public:
  explicit Band5(std::size_t n) : diag_(n, 0.0), off1_(n, 0.0), off2_(n, 0.0) {}

  std::size_t size() const noexcept { return diag_.size(); }
  void zero();
  void add(std::size_t i, std::size_t j, double value);
  void add_identity(double value);
  double at(std::size_t i, std::size_t j) const;

  /// Factorises in place; returns false on a nonpositive pivot (matrix left
  /// partially overwritten).
  bool factorize();
  /// Solves with the factor from factorize(); rhs is overwritten.
  void solve(std::span<double> rhs) const;

 private:
  std::vector<double> diag_;
  std::vector<double> off1_;  // (i, i+1)
  std::vector<double> off2_;  // (i, i+2)
};

double alpha(std::span<const double> x, double h);
double beta(std::span<const double> x, double h);
/// 2 sqrt(2/3) int v^{3/2} dx
double three_halves(std::span<const double> x, double h);
inline double energy(std::span<const double> x, double h) { return alpha(x, h) + beta(x, h); }
inline double entropy(std::span<const double> x, double h) {
  return alpha(x, h) + three_halves(x, h);
}
double fourth_moment(std::span<const double> x, double h);
double sup(std::span<const double> x, double h);

void energy_gradient(std::span<const double> x, double h, std::span<double> grad);
void entropy_gradient(std::span<const double> x, double h, std::span<double> grad);
void energy_hessian(std::span<const double> x, double h, Band5& hess);

/// int (x + sqrt6 (sqrt v)_x)^2 v dx as h sum u_i^2 over the nodes. Interior
/// nodes use the velocity of the interior three-halves sum, the end nodes the
/// quadratic edge profile.
double dissipation(std::span<const double> x, double h);
/// int (x + sqrt6 v_x)^2 v dx with nodal derivatives.
double literal_dissipation(std::span<const double> x, double h);
/// (sqrt6 / 24) int v^{-3/2} v_x^4 dx at interior nodes, with the quadratic
/// edge profile closing the end half cells.
double extra_dissipation(std::span<const double> x, double h);

}  // namespace thinfilm::lagrangian
