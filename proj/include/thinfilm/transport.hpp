#pragma once

#include <functional>
#include <span>
#include <vector>

#include "thinfilm/density.hpp"

namespace thinfilm {

/// Monotone coupling of two quantile states with the same mass and N.
struct TransportPlan {
  QuantileDensity source;
  QuantileDensity target;
  /// T(source.X_i) = target.X_i
  std::vector<double> map_values;
  /// W2^2
  double cost;
};

TransportPlan transport_plan(const QuantileDensity& mu, const QuantileDensity& nu);

/// (M / N) sum (X_i^mu - X_i^nu)^2
double w2_sq(const QuantileDensity& mu, const QuantileDensity& nu);
double w2(const QuantileDensity& mu, const QuantileDensity& nu);

struct Atom {
  double x;
  double mass;
};

inline constexpr std::size_t kBruteforceMaxAtoms = 12;

/// W2^2 between two discrete measures by the sorted-quantile formula, with
/// unequal atom weights handled by merging the cumulative masses.
double w2_sq_atoms(std::span<const Atom> mu, std::span<const Atom> nu);

/// Exact minimum of sum gamma_ij |x_i - y_j|^2 over the coupling polytope,
/// by successive shortest paths on the bipartite flow network. Does not use
/// the one-dimensional monotone structure; it is the validation oracle.
double w2_bruteforce(std::span<const Atom> mu, std::span<const Atom> nu);

/// Positions (1 - t) X^mu + t X^nu.
QuantileDensity displacement_interpolate(const QuantileDensity& mu, const QuantileDensity& nu,
                                         double t);

/// Positions T(X_i). The map must be nondecreasing on the positions; a map
/// that collapses two positions onto one is rejected as well.
QuantileDensity pushforward(const QuantileDensity& mu, const std::function<double(double)>& map);
QuantileDensity pushforward(const QuantileDensity& mu, std::span<const double> map_values);

}  // namespace thinfilm
