#include "thinfilm/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "thinfilm/transport.hpp"

namespace thinfilm {

namespace {

const double kSqrt6 = std::sqrt(6.0);

// Copy of v on a grid with the same spacing extended to cover [lo, hi],
// zero outside the original samples.
GridDensity covering(const GridDensity& v, double lo, double hi) {
  const double dx = v.dx();
  const auto below = static_cast<std::size_t>(std::max(0.0, std::ceil((v.x_min() - lo) / dx)) + 2);
  const auto above = static_cast<std::size_t>(std::max(0.0, std::ceil((hi - v.x_max()) / dx)) + 2);
  std::vector<double> values(below + v.size() + above, 0.0);
  std::copy(v.values().begin(), v.values().end(), values.begin() + static_cast<long>(below));
  return GridDensity(v.x_min() - static_cast<double>(below) * dx, dx, std::move(values));
}

struct Paired {
  GridDensity v;
  GridDensity ref;
};

Paired pair_with_equilibrium(const GridDensity& v, const SmythHill& smyth, const char* where) {
  require_matching_mass(v.mass(), smyth, where);
  const double c = smyth.support_radius();
  GridDensity w = covering(v, -c, c);
  GridDensity ref = smyth.sample(w.x_min(), w.dx(), w.size());
  return {std::move(w), std::move(ref)};
}

double trapezoid(const GridDensity& g, const std::function<double(std::size_t)>& f) {
  double sum = 0.5 * (f(0) + f(g.size() - 1));
  for (std::size_t i = 1; i + 1 < g.size(); ++i) sum += f(i);
  return sum * g.dx();
}

void require_steps(const JkoTrajectory& traj, std::size_t n, const char* where) {
  if (n == 0 || n > traj.steps()) {
    std::ostringstream os;
    os << where << ": step " << n << " outside [1, " << traj.steps() << "]";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

InequalityReport make_report(std::string name, double lhs, double rhs, double tolerance) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.tolerance = tolerance;
  r.passed = std::isfinite(r.slack) && r.slack >= -tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Constants

double sup_bound_printed(double mass, double energy) {
  return (5.0 / 3.0) * std::pow(mass, 0.6) * std::pow(2.0 * energy, 0.2);
}

double sup_bound(double mass, double dirichlet) {
  return std::cbrt(3.0 * mass * dirichlet);
}

H1aConstants h1a_constants(const SmythHill& smyth, double energy) {
  const double c2 = smyth.support_radius() * smyth.support_radius();
  H1aConstants k;
  k.sup_bound = sup_bound(smyth.mass(), 2.0 * energy);
  k.K1 = 9.0 * (1.0 + c2) / c2;
  k.K2 = 8.0 * c2 * (1.0 + c2) + 3.0 * (c2 + 1.0) / c2 * k.sup_bound + 2.0;
  k.assembly =
      "K1 = 9(1+C^2)/C^2; K2 = 8C^2(1+C^2) + 3(C^2+1)/C^2 * S + 2 with "
      "S = 3^(1/3) M^(1/3) (2E)^(1/3) at the checked density";
  return k;
}

M4Constant m4_constant(double mass, double energy0) {
  M4Constant k;
  k.sup_bound = sup_bound(mass, 2.0 * energy0);
  k.K3 = (81.0 / 4.0) * (24.0 / kSqrt6) * std::pow(k.sup_bound, 1.5);
  k.assembly =
      "K3 = (81/4)(24/sqrt6) S^(3/2), S = 3^(1/3) M^(1/3) (2E[v0])^(1/3); "
      "Young split 18 * (2/9) = 4 absorbs -4 M4";
  return k;
}

double expd3_K(const SmythHill& smyth, double h_rel0) {
  const double h = std::max(h_rel0, 0.0);
  return 2.0 * std::sqrt(smyth.alpha()) * std::sqrt(h) + h;
}

double expd3_bound(double K, double lambda, double T) {
  const double el = std::exp(lambda);
  return (K / 3.0) * (1.0 + el + (5.0 / lambda) * el) * std::exp(-lambda * T);
}

// ---------------------------------------------------------------------------
// Static checks

InequalityReport check_h1(const GridDensity& v, const SmythHill& smyth, double tolerance) {
  auto [w, ref] = pair_with_equilibrium(v, smyth, "check_h1");
  const double c = smyth.support_radius();
  const double e_rel = energy(w) - energy(ref);
  std::vector<double> diff(w.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = w[i] - ref[i];
  const auto dx = derivative(diff, w.dx());
  const double grad = 0.5 * trapezoid(w, [&](std::size_t i) { return dx[i] * dx[i]; });
  const double outer = trapezoid(w, [&](std::size_t i) {
    const double x = w.x(i);
    return std::abs(x) >= c ? x * x * w[i] : 0.0;
  });
  auto r = make_report("h1", grad + outer / 3.0, e_rel, tolerance);
  r.context = {{"E_rel", e_rel}, {"half_grad_sq", grad}, {"outer_moment", outer}};
  return r;
}

InequalityReport check_h1a(const GridDensity& v, const SmythHill& smyth, double tolerance) {
  auto [w, ref] = pair_with_equilibrium(v, smyth, "check_h1a");
  const double e = energy(w);
  const double e_rel = e - energy(ref);
  const H1aConstants k = h1a_constants(smyth, e);
  const double norm = weighted_norm_sq(w, ref, 1.0);
  auto r = make_report("h1a", norm, k.K1 * e_rel * e_rel + k.K2 * std::max(e_rel, 0.0), tolerance);
  r.context = {{"E_rel", e_rel}, {"K1", k.K1}, {"K2", k.K2}, {"sup_bound", k.sup_bound}};
  r.note = k.assembly;
  return r;
}

InequalityReport check_infbnd(const GridDensity& v, double tolerance) {
  const double e = energy(v);
  auto r = make_report("infbnd", sup_norm(v), sup_bound_printed(v.mass(), e), tolerance);
  r.context = {{"E", e}, {"mass", v.mass()}};
  return r;
}

InequalityReport check_infbnd_optimised(const GridDensity& v, double tolerance) {
  const double dirichlet = 2.0 * beta(v);
  auto r = make_report("infbnd.optimised", sup_norm(v), sup_bound(v.mass(), dirichlet), tolerance);
  r.context = {{"grad_sq", dirichlet}, {"mass", v.mass()}};
  return r;
}

InequalityReport check_pkl(const GridDensity& v, const SmythHill& smyth, double tolerance) {
  auto [w, ref] = pair_with_equilibrium(v, smyth, "check_pkl");
  const double h_rel = entropy(w) - entropy(ref);
  const double l1 = l1_distance(w, ref);
  auto r = make_report("pkl", l1 * l1, h_rel, tolerance);
  r.context = {{"H_rel", h_rel}, {"l1", l1}};
  return r;
}

namespace {

InequalityReport talagrand(const GridDensity& v, const SmythHill& smyth, double factor,
                           const char* name, double tolerance) {
  auto [w, ref] = pair_with_equilibrium(v, smyth, name);
  const double h_rel = entropy(w) - entropy(ref);
  const QuantileDensity q = grid_to_quantile(v, kStaticQuantileCells);
  // Same positions, relabelled with the mass of q so the cell masses agree.
  const QuantileDensity sq = smyth.quantiles(kStaticQuantileCells);
  const QuantileDensity qs(q.mass(), std::vector<double>(sq.positions().begin(),
                                                         sq.positions().end()));
  const double w2 = w2_sq(q, qs);
  auto r = make_report(name, w2, factor * h_rel, tolerance);
  r.context = {{"W2_sq", w2}, {"H_rel", h_rel}};
  return r;
}

}  // namespace

InequalityReport check_talagrand(const GridDensity& v, const SmythHill& smyth, double tolerance) {
  return talagrand(v, smyth, 1.0, "talagrand", tolerance);
}

InequalityReport check_talagrand_half(const GridDensity& v, const SmythHill& smyth,
                                      double tolerance) {
  return talagrand(v, smyth, 2.0, "talagrand.half", tolerance);
}

InequalityReport check_entsecmo(const GridDensity& v, const SmythHill& smyth, double tolerance) {
  auto [w, ref] = pair_with_equilibrium(v, smyth, "check_entsecmo");
  const double a_rel = alpha(w) - alpha(ref);
  const double h_rel = entropy(w) - entropy(ref);
  const double bound =
      2.0 * std::sqrt(smyth.alpha()) * std::sqrt(std::max(h_rel, 0.0)) + h_rel;
  auto r = make_report("entsecmo", a_rel, bound, tolerance);
  r.context = {{"alpha_rel", a_rel}, {"H_rel", h_rel}};
  return r;
}

InequalityReport check_displacement_convexity(const QuantileDensity& mu, const QuantileDensity& nu,
                                              double t, double lambda, double tolerance) {
  const QuantileDensity mid = displacement_interpolate(mu, nu, t);
  const double w2 = w2_sq(mu, nu);
  const double h_mu = entropy(mu), h_nu = entropy(nu), h_t = entropy(mid);
  auto r = make_report(lambda == 1.0 ? "convexity" : "convexity.lambda",
                       lambda * t * (1.0 - t) * w2 + h_t, (1.0 - t) * h_mu + t * h_nu, tolerance);
  r.context = {{"t", t}, {"lambda", lambda}, {"W2_sq", w2}, {"H_t", h_t}};
  return r;
}

InequalityReport check_alpha_w2(const QuantileDensity& mu, const QuantileDensity& nu,
                                double tolerance) {
  const double d = std::abs(std::sqrt(alpha(mu)) - std::sqrt(alpha(nu)));
  return make_report("alpdif", d, w2(mu, nu), tolerance);
}

std::vector<InequalityReport> static_suite(const GridDensity& v, const SmythHill& smyth,
                                           double tolerance) {
  return {check_h1(v, smyth, tolerance),        check_h1a(v, smyth, tolerance),
          check_infbnd(v, tolerance),           check_pkl(v, smyth, tolerance),
          check_talagrand(v, smyth, tolerance), check_entsecmo(v, smyth, tolerance)};
}

// ---------------------------------------------------------------------------
// Dynamic checks

std::vector<InequalityReport> check_entropy_dissipation_step(const FunctionalRecord& cur,
                                                             const FunctionalRecord& prev,
                                                             double tau, double tolerance) {
  const double rate = (cur.H_rel - prev.H_rel) / tau;
  std::vector<InequalityReport> out;
  out.push_back(make_report("Hdiscvx.first", rate, -cur.D - cur.extra_dissipation, tolerance));
  out.push_back(make_report("Hdiscvx.first_without_extra", rate, -cur.D, tolerance));
  out.push_back(make_report("Hdiscvx.second", rate, -2.0 * cur.H_rel, tolerance));
  for (auto& r : out) r.context = {{"time", cur.time}, {"tau", tau}};
  return out;
}

std::vector<InequalityReport> check_alpha_step(const Snapshot& cur, const Snapshot& prev,
                                               double tau, double tolerance) {
  const double change = (cur.record.alpha - prev.record.alpha) / tau;
  const double moved = cur.diagnostics.w2_sq_moved / tau;
  std::vector<InequalityReport> out;
  out.push_back(make_report(
      "barcba", -2.0 * prev.record.alpha_rel + 3.0 * prev.record.beta_rel - moved, change,
      tolerance));
  out.push_back(make_report(
      "barcba.current", -2.0 * cur.record.alpha_rel + 3.0 * cur.record.beta_rel - moved, change,
      tolerance));
  for (auto& r : out) r.context = {{"time", cur.time}, {"tau", tau}};
  return out;
}

InequalityReport check_alphaineq1(const JkoTrajectory& traj, std::size_t m, std::size_t n,
                                  double tolerance) {
  if (m >= n || n > traj.steps())
    throw std::invalid_argument("check_alphaineq1: window shorter than 2 snapshots");
  const double tau = traj.config.tau;
  const auto& s = traj.snapshots;
  double sum_alpha = 0.0, sum_energy = 0.0;
  for (std::size_t j = m + 1; j <= n; ++j) {
    sum_alpha += s[j].record.alpha_rel;
    sum_energy += s[j].record.E_rel;
  }
  const double length = tau * static_cast<double>(n - m);
  const double lhs = (3.0 * tau * sum_energy - tau * s[0].record.E_rel) / length;
  const double rhs = (s[n].record.alpha_rel - s[m].record.alpha_rel + 5.0 * tau * sum_alpha) / length;
  auto r = make_report("alphaineq1", lhs, rhs, tolerance);
  r.context = {{"time", s[n].time}, {"window_start", s[m].time}};
  return r;
}

InequalityReport check_alph_disp(const JkoTrajectory& traj, std::size_t n, double tolerance) {
  require_steps(traj, n, "check_alph_disp");
  const auto& s = traj.snapshots;
  const double t = s[n].time;
  if (t < 1.0 - 1e-9) throw std::invalid_argument("check_alph_disp: window needs t >= 1");
  std::size_t m = n;
  while (m > 0 && s[m].time > t - 1.0 + 1e-9) --m;
  double integral = 0.0;
  for (std::size_t j = m; j < n; ++j)
    integral += 0.5 * (s[j + 1].time - s[j].time) * (s[j].record.alpha_rel + s[j + 1].record.alpha_rel);
  const double length = t - s[m].time;
  const double rhs = (s[n].record.alpha_rel - s[m].record.alpha_rel + 5.0 * integral) / length;
  const double lhs = 3.0 * s[n].record.E_rel;
  auto r = make_report("alph-disp", lhs, rhs, tolerance);
  r.context = {{"time", t}, {"window_start", s[m].time}};
  return r;
}

InequalityReport check_h_dissp(const JkoTrajectory& traj, std::size_t n, double tolerance) {
  require_steps(traj, n, "check_h_dissp");
  const auto& s = traj.snapshots;
  double sum = 0.0;
  for (std::size_t j = 1; j <= n; ++j) sum += (s[j].time - s[j - 1].time) * s[j].record.H_rel;
  auto r = make_report("H-dissp", 2.0 * sum + s[n].record.H_rel, s[0].record.H_rel, tolerance);
  r.context = {{"time", s[n].time}};
  return r;
}

InequalityReport check_free_estimate(const JkoTrajectory& traj, std::size_t n, double tolerance) {
  require_steps(traj, n, "check_free_estimate");
  const auto& s = traj.snapshots;
  double moved = 0.0;
  for (std::size_t j = 1; j <= n; ++j) moved += s[j].diagnostics.w2_sq_moved;
  auto r = make_report("free_estimate", moved,
                       traj.config.tau * (s[0].record.E_rel - s[n].record.E_rel), tolerance);
  r.context = {{"time", s[n].time}};
  return r;
}

InequalityReport check_m4_bound(const JkoTrajectory& traj, double tolerance) {
  if (traj.snapshots.empty()) throw std::invalid_argument("check_m4_bound: empty trajectory");
  const auto& s = traj.snapshots;
  const M4Constant k = m4_constant(traj.mass(), s[0].record.E);
  double worst = s[0].record.M4, when = s[0].time;
  for (const Snapshot& snap : s)
    if (snap.record.M4 > worst) {
      worst = snap.record.M4;
      when = snap.time;
    }
  // H_rel below zero measures how far the discrete entropy sits from the
  // continuum minimum; the bound gets K3 times that much room.
  double offset = 0.0;
  for (const Snapshot& snap : s) offset = std::max(offset, -snap.record.H_rel);
  auto r = make_report("disc4mombdd", worst,
                       s[0].record.M4 + k.K3 * std::max(s[0].record.H_rel, 0.0),
                       tolerance + k.K3 * offset);
  r.context = {{"time", when},
               {"K3", k.K3},
               {"sup_bound", k.sup_bound},
               {"M4_0", s[0].record.M4},
               {"H_rel_offset", offset}};
  r.note = k.assembly;
  return r;
}

InequalityReport check_m4_step(const JkoTrajectory& traj, std::size_t n, double K3,
                               double tolerance) {
  require_steps(traj, n, "check_m4_step");
  const auto& s = traj.snapshots;
  const double tau = s[n].time - s[n - 1].time;
  auto r = make_report("disc4mombdd.step", (s[n].record.M4 - s[n - 1].record.M4) / tau,
                       K3 * (s[n - 1].record.H_rel - s[n].record.H_rel) / tau, tolerance);
  r.context = {{"time", s[n].time}, {"K3", K3}};
  return r;
}

InequalityReport check_expd3(const JkoTrajectory& traj, std::size_t n, double tolerance) {
  if (traj.snapshots.empty() || traj.snapshots.back().time < 2.0 - 1e-9)
    throw std::invalid_argument("check_expd3: trajectory must span T >= 2");
  require_steps(traj, n, "check_expd3");
  const auto& s = traj.snapshots;
  const double K = expd3_K(SmythHill(traj.mass()), s[0].record.H_rel);
  auto r = make_report("expd3", s[n].record.E_rel, expd3_bound(K, 1.0, s[n].time), tolerance);
  r.context = {{"time", s[n].time}, {"K", K}};
  return r;
}

std::vector<SuiteSummary> summarize(std::span<const InequalityReport> reports,
                                    const char* time_key) {
  std::vector<SuiteSummary> out;
  for (const InequalityReport& r : reports) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SuiteSummary& s) { return s.name == r.name; });
    if (it == out.end()) {
      out.push_back(SuiteSummary{r.name, 0, 0, -1.0, r.slack});
      it = out.end() - 1;
    }
    ++it->checked;
    it->worst_slack = std::min(it->worst_slack, r.slack);
    if (r.passed) {
      ++it->passed;
    } else if (it->first_failure < 0.0) {
      auto t = r.context.find(time_key);
      it->first_failure = t != r.context.end() ? t->second
                                               : static_cast<double>(it->checked - 1);
    }
  }
  return out;
}

std::vector<InequalityReport> dynamic_suite(const JkoTrajectory& traj,
                                            const DynamicSuiteOptions& options) {
  std::vector<InequalityReport> out;
  const std::size_t steps = traj.steps();
  if (steps == 0) return out;
  const double tau = traj.config.tau;
  const double tol = options.tolerance.value(tau, traj.config.n_cells);
  const auto& s = traj.snapshots;
  const M4Constant k = m4_constant(traj.mass(), s[0].record.E);
  const std::size_t per_unit = static_cast<std::size_t>(std::llround(1.0 / tau));

  for (std::size_t n = 1; n <= steps; ++n) {
    for (auto& r : check_entropy_dissipation_step(s[n].record, s[n - 1].record, tau, tol))
      out.push_back(std::move(r));
    for (auto& r : check_alpha_step(s[n], s[n - 1], tau, tol)) out.push_back(std::move(r));
    out.push_back(check_m4_step(traj, n, k.K3, tol));
    out.push_back(check_h_dissp(traj, n, s[n].time * tol));
    out.push_back(check_free_estimate(traj, n, options.bound_tolerance));
    if (n >= per_unit) {
      out.push_back(check_alphaineq1(traj, n - per_unit, n, tol));
      out.push_back(check_alph_disp(traj, n, tol));
    }
  }
  out.push_back(check_alphaineq1(traj, 0, steps, tol));
  out.push_back(check_m4_bound(traj, options.bound_tolerance));
  if (s.back().time >= 2.0 - 1e-9)
    for (std::size_t n = 1; n <= steps; ++n)
      if (s[n].time >= 1.0 - 1e-9) out.push_back(check_expd3(traj, n, options.bound_tolerance));
  return out;
}

std::size_t first_entropy_increase(const JkoTrajectory& traj) {
  const auto& s = traj.snapshots;
  for (std::size_t n = 1; n < s.size(); ++n)
    if (s[n].record.H_rel > s[n - 1].record.H_rel) return n;
  return 0;
}

DynamicTolerance calibrate_dynamic_tolerance(const SmythHill& smyth,
                                             std::span<const CalibrationSetting> settings,
                                             double t_final, double safety) {
  if (settings.empty() || !(safety >= 1.0) || !(t_final > 0.0))
    throw std::invalid_argument("calibrate_dynamic_tolerance: bad arguments");
  std::vector<double> violation(settings.size(), 0.0);
  for (std::size_t k = 0; k < settings.size(); ++k) {
    JkoConfig config;
    config.tau = settings[k].tau;
    config.n_cells = settings[k].n_cells;
    const JkoTrajectory traj = run(smyth.quantiles(config.n_cells), t_final, config, smyth);
    const auto& s = traj.snapshots;
    for (std::size_t n = 1; n < s.size(); ++n) {
      auto h = check_entropy_dissipation_step(s[n].record, s[n - 1].record, config.tau, 0.0);
      auto a = check_alpha_step(s[n], s[n - 1], config.tau, 0.0);
      for (const auto* r : {&h[1], &h[2], &a[0], &a[1]})
        violation[k] = std::max(violation[k], -r->slack);
    }
  }
  DynamicTolerance tol{0.0, 0.0};
  for (std::size_t k = 0; k < settings.size(); ++k)
    tol.c2 = std::max(tol.c2, safety * violation[k] * static_cast<double>(settings[k].n_cells));
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const double rest = safety * violation[k] - tol.c2 / static_cast<double>(settings[k].n_cells);
    tol.c1 = std::max(tol.c1, rest / settings[k].tau);
  }
  return tol;
}

}  // namespace thinfilm
