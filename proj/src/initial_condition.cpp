#include "thinfilm/initial_condition.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "thinfilm/corpus.hpp"
#include "thinfilm/io.hpp"

namespace thinfilm {

namespace {

std::vector<double> parse_numbers(const std::string& args, const std::string& spec) {
  std::vector<double> out;
  std::istringstream is(args);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    char* end = nullptr;
    const double x = std::strtod(cell.c_str(), &end);
    if (cell.empty() || *end != '\0' || !std::isfinite(x))
      throw std::invalid_argument("initial condition '" + spec + "': bad number '" + cell + "'");
    out.push_back(x);
  }
  return out;
}

void require_count(const std::vector<double>& v, std::size_t lo, std::size_t hi,
                   const std::string& spec) {
  if (v.size() < lo || v.size() > hi)
    throw std::invalid_argument("initial condition '" + spec + "': wrong number of parameters");
}

}  // namespace

QuantileDensity InitialCondition::quantiles(std::size_t n) const {
  if (grid) return grid_to_quantile(*grid, n);
  QuantileDensity q = SmythHill(mass).quantiles(n);
  if (dilate) {
    std::vector<double> x(q.positions().begin(), q.positions().end());
    for (double& xi : x) xi *= *dilate;
    q = QuantileDensity(mass, std::move(x));
  }
  if (translate) q = q.translated(*translate);
  return q;
}

InitialCondition parse_initial_condition(const std::string& spec, double mass) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("initial condition '" + spec + "': expected kind:parameters");
  const std::string kind = spec.substr(0, colon), args = spec.substr(colon + 1);
  InitialCondition ic;
  ic.spec = spec;
  ic.mass = mass;
  if (kind == "from-file") {
    ic.grid = io::load_grid(args);
    ic.mass = ic.grid->mass();
    return ic;
  }
  if (!(mass > 0.0)) throw std::invalid_argument("initial condition: mass must be positive");
  const auto p = parse_numbers(args, spec);
  if (kind == "smyth-translated") {
    require_count(p, 1, 1, spec);
    ic.translate = p[0];
  } else if (kind == "smyth-dilated") {
    require_count(p, 1, 1, spec);
    if (!(p[0] > 0.0)) throw std::invalid_argument("smyth-dilated: factor must be positive");
    ic.dilate = p[0];
  } else if (kind == "two-bump") {
    require_count(p, 5, 5, spec);
    if (!(p[4] > 0.0 && p[4] < 1.0)) throw std::invalid_argument("two-bump: w outside (0, 1)");
    ic.grid = bump_mixture({{p[0], p[2], p[4]}, {p[1], p[3], 1.0 - p[4]}}, mass,
                           SmythHill(mass).support_radius());
  } else if (kind == "smyth-gaussian") {
    require_count(p, 1, 3, spec);
    const double a = p[0];
    const double L = p.size() > 1 ? p[1] : 6.0;
    const double dx = p.size() > 2 ? p[2] : 0.025;
    if (!(a > 0.0) || !(L > 0.0) || !(dx > 0.0))
      throw std::invalid_argument("smyth-gaussian: parameters must be positive");
    const SmythHill sh(mass);
    const auto count = static_cast<std::size_t>(std::llround(2.0 * L / dx)) + 1;
    const GridDensity raw = GridDensity::sample(
        [&](double x) { return sh.value(x) + a * std::exp(-0.5 * x * x); }, -L, dx, count);
    std::vector<double> values(raw.values().begin(), raw.values().end());
    const double scale = mass / raw.mass();
    for (double& v : values) v *= scale;
    ic.grid = GridDensity(-L, dx, std::move(values));
  } else {
    throw std::invalid_argument("initial condition '" + spec + "': unknown kind '" + kind + "'");
  }
  return ic;
}

}  // namespace thinfilm
