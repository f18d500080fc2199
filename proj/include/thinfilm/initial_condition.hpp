#pragma once

#include <optional>
#include <string>

#include "thinfilm/density.hpp"

namespace thinfilm {

/// Initial data named by a spec string:
///   smyth-translated:d          Smyth-Hill of mass M shifted by d
///   smyth-dilated:l             Smyth-Hill of mass M with positions scaled by l
///   two-bump:c1,c2,r1,r2,w      w b(c1, r1) + (1 - w) b(c2, r2), cubic bumps
///   smyth-gaussian:a[,L[,dx]]   Smyth-Hill + a exp(-x^2/2) on [-L, L], rescaled to M
///   from-file:path              GridDensity CSV; its own mass replaces M
struct InitialCondition {
  std::string spec;
  double mass = 0.0;
  /// Exact positions for the Smyth-Hill based specs.
  std::optional<double> translate;
  std::optional<double> dilate;
  /// Samples for the grid-native specs.
  std::optional<GridDensity> grid;

  QuantileDensity quantiles(std::size_t n) const;
};

/// Throws std::invalid_argument on an unknown or malformed spec.
InitialCondition parse_initial_condition(const std::string& spec, double mass);

}  // namespace thinfilm
