#pragma once

#include <cstdint>
#include <vector>

#include "thinfilm/density.hpp"

namespace thinfilm {

struct Bump {
  double centre;
  double half_width;
  double weight;
};

/// sum_k w_k b_k with b_k proportional to (r_k^2 - (x - c_k)^2)_+^3 of unit
/// mass, sampled on a grid of spacing dx covering every bump and [-cover, cover]
/// with a margin, then scaled to the given trapezoid mass.
GridDensity bump_mixture(const std::vector<Bump>& bumps, double mass, double cover,
                         double dx = 1e-3);

struct CorpusEntry {
  std::vector<Bump> bumps;
  GridDensity density;
};

/// count mixtures of 1 to 4 bumps with centres in [-1, 1], half-widths in
/// [0.4, 1.2] and weights in [0.5, 1.5], all of the equilibrium's mass.
std::vector<CorpusEntry> bump_corpus(std::size_t count, std::uint64_t seed,
                                     const SmythHill& smyth, double dx = 1e-3);

}  // namespace thinfilm
