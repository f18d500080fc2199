#include "thinfilm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace thinfilm {

GridDensity bump_mixture(const std::vector<Bump>& bumps, double mass, double cover, double dx) {
  if (bumps.empty()) throw std::invalid_argument("bump_mixture: no bumps");
  double lo = -cover, hi = cover;
  for (const Bump& b : bumps) {
    if (!(b.half_width > 0.0) || !(b.weight > 0.0))
      throw std::invalid_argument("bump_mixture: half-width and weight must be positive");
    lo = std::min(lo, b.centre - b.half_width);
    hi = std::max(hi, b.centre + b.half_width);
  }
  lo -= 10.0 * dx;
  hi += 10.0 * dx;
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / dx)) + 1;
  auto f = [&](double x) {
    double sum = 0.0;
    for (const Bump& b : bumps) {
      const double r2 = b.half_width * b.half_width;
      const double y = x - b.centre;
      if (y * y >= r2) continue;
      const double z = r2 - y * y;
      // int (r^2 - y^2)^3 dy = (32/35) r^7
      sum += b.weight * z * z * z / (32.0 / 35.0 * std::pow(b.half_width, 7));
    }
    return sum;
  };
  const GridDensity raw = GridDensity::sample(f, lo, dx, count);
  std::vector<double> values(raw.values().begin(), raw.values().end());
  const double scale = mass / raw.mass();
  for (double& v : values) v *= scale;
  return GridDensity(lo, dx, std::move(values));
}

std::vector<CorpusEntry> bump_corpus(std::size_t count, std::uint64_t seed,
                                     const SmythHill& smyth, double dx) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> how_many(1, 4);
  std::uniform_real_distribution<double> centre(-1.0, 1.0), width(0.4, 1.2), weight(0.5, 1.5);
  std::vector<CorpusEntry> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<Bump> bumps(static_cast<std::size_t>(how_many(rng)));
    for (Bump& b : bumps) {
      b.centre = centre(rng);
      b.half_width = width(rng);
      b.weight = weight(rng);
    }
    GridDensity v = bump_mixture(bumps, smyth.mass(), smyth.support_radius(), dx);
    out.push_back(CorpusEntry{std::move(bumps), std::move(v)});
  }
  return out;
}

}  // namespace thinfilm
