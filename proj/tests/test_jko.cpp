#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "thinfilm/initial_condition.hpp"
#include "thinfilm/jko.hpp"
#include "thinfilm/lagrangian.hpp"
#include "thinfilm/transport.hpp"

using namespace thinfilm;

namespace {

constexpr double kM = 2.0 / 45.0;

JkoConfig small_config(double tau = 1e-3, std::size_t n = 200) {
  JkoConfig c;
  c.tau = tau;
  c.n_cells = n;
  return resolve_config(c, SmythHill(kM).quantiles(n));
}

std::vector<double> positions(const QuantileDensity& q) {
  return {q.positions().begin(), q.positions().end()};
}

}  // namespace

TEST(Config, Validation) {
  JkoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.n_cells = 16;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.p_values = {2.5};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  const JkoConfig r = resolve_config(JkoConfig{}, SmythHill(kM).quantiles(400));
  EXPECT_GT(r.eps_mono, 0.0);
}

TEST(Objective, FixedPointAndNoMovement) {
  const SmythHill s(kM);
  const JkoConfig c = small_config();
  const auto x = positions(s.quantiles(200));
  const double h = kM / 200;
  const double e_rel = lagrangian::energy(x, h) - s.energy();
  EXPECT_NEAR(objective(x, x, kM, c, s), c.tau * e_rel, 1e-18);
  EXPECT_NEAR(objective(x, x, kM, c, s), 0.0, c.tau * 1e-5);
  const auto y = positions(s.quantiles(200).translated(0.2));
  EXPECT_NEAR(objective(y, y, kM, c, s), c.tau * (lagrangian::energy(y, h) - s.energy()), 1e-18);
}

TEST(Objective, FirstVariation) {
  const SmythHill s(kM);
  const JkoConfig c = small_config();
  const auto prev = positions(s.quantiles(200).translated(0.1));
  auto x = positions(s.quantiles(200));
  const double h = kM / 200;
  std::vector<double> eta(x.size()), grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) eta[i] = std::sin(0.05 * i) * 1e-2;
  lagrangian::energy_gradient(x, h, grad);
  double analytic = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    analytic += (c.tau * grad[i] + h * (x[i] - prev[i])) * eta[i];
  const double eps = 1e-4;
  std::vector<double> xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] += eps * eta[i];
    xm[i] -= eps * eta[i];
  }
  const double fd = (objective(xp, prev, kM, c, s) - objective(xm, prev, kM, c, s)) / (2 * eps);
  EXPECT_NEAR(fd, analytic, 1e-6 * std::abs(analytic));
}

TEST(Objective, RejectsMonotonicityViolation) {
  const SmythHill s(kM);
  const JkoConfig c = small_config();
  auto x = positions(s.quantiles(200));
  std::swap(x[10], x[11]);
  EXPECT_THROW(objective(x, x, kM, c, s), std::invalid_argument);
}

TEST(Step, EquilibriumBarelyMoves) {
  // The sampled quantiles sit within discretisation error of the discrete
  // minimiser: the step moves far less than one from a translate, and less
  // under refinement.
  const SmythHill s(kM);
  double previous = INFINITY;
  for (std::size_t n : {200, 400, 800}) {
    const JkoConfig c = small_config(1e-3, n);
    const QuantileDensity q = s.quantiles(n);
    const StepResult r = step(q, c, s);
    const StepResult t = step(q.translated(0.5), c, s);
    const double moved = w2(r.state, q);
    EXPECT_LT(moved, 0.2 * w2(t.state, q.translated(0.5)));
    EXPECT_LT(moved, previous);
    EXPECT_LE(r.diagnostics.objective_final, r.diagnostics.objective_initial);
    previous = moved;
  }
}

TEST(Step, TranslatedDecreasesAlphaAndEnergy) {
  const SmythHill s(kM);
  const JkoConfig c = small_config();
  const QuantileDensity q = s.quantiles(200).translated(0.5);
  const StepResult r = step(q, c, s);
  const double h = q.cell_mass();
  EXPECT_LT(lagrangian::alpha(positions(r.state), h), lagrangian::alpha(positions(q), h));
  const double e0 = lagrangian::energy(positions(q), h), e1 = lagrangian::energy(positions(r.state), h);
  EXPECT_LT(e1, e0);
  // Free estimate for the pair.
  EXPECT_LE(0.5 * w2_sq(r.state, q), c.tau * (e0 - e1) + 1e-15);
  EXPECT_NEAR(r.diagnostics.w2_sq_moved, 0.5 * w2_sq(r.state, q), 1e-18);
  EXPECT_GE(r.diagnostics.el_residual, 0.0);
  EXPECT_TRUE(r.diagnostics.converged);
}

TEST(ElResidual, EquilibriumIdentity) {
  const SmythHill s(kM);
  const JkoConfig c = small_config(1e-3, 400);
  const QuantileDensity q = s.quantiles(400);
  // Both sides of the map are the identity when v_xxx = x.
  EXPECT_LT(el_residual(q, q, c), 0.05);
}

TEST(ElResidual, DecreasesUnderRefinement) {
  const SmythHill s(kM);
  double previous = INFINITY;
  for (auto [tau, n] : {std::pair{2e-3, 100}, {1e-3, 200}, {5e-4, 400}}) {
    JkoConfig c;
    c.tau = tau;
    c.n_cells = static_cast<std::size_t>(n);
    const JkoTrajectory traj = run(s.quantiles(c.n_cells).translated(0.3), 0.1, c, s);
    const double r = traj.snapshots.back().diagnostics.el_residual;
    EXPECT_LT(r, previous) << tau;
    previous = r;
  }
}

TEST(Run, ZeroFinalTimeGivesInitialSnapshot) {
  const SmythHill s(kM);
  const JkoTrajectory traj = run(s.quantiles(200), 0.0, small_config(), s);
  ASSERT_EQ(traj.snapshots.size(), 1u);
  EXPECT_EQ(traj.snapshots[0].time, 0.0);
}

TEST(Run, EquilibriumRecordsConstant) {
  const SmythHill s(kM);
  const JkoTrajectory traj = run(s.quantiles(200), 0.05, small_config(), s);
  EXPECT_EQ(traj.steps(), 50u);
  // Constant up to the relaxation onto the discrete minimiser, which is
  // below the quadrature error of H at this N.
  const double h0 = traj.snapshots.front().record.H;
  const double quadrature = std::abs(h0 - s.entropy());
  for (const Snapshot& snap : traj.snapshots) EXPECT_NEAR(snap.record.H, h0, quadrature);
}

TEST(Run, TranslatedEntropyDecay) {
  const SmythHill s(kM);
  JkoConfig c;
  const JkoTrajectory traj = run(s.quantiles(400).translated(0.5), 1.0, c, s);
  ASSERT_EQ(traj.steps(), 1000u);
  const double h0 = traj.snapshots.front().record.H_rel;
  const double h1 = traj.snapshots.back().record.H_rel;
  EXPECT_NEAR(traj.snapshots.back().time, 1.0, 1e-12);
  EXPECT_LE(h1, std::exp(-2.0 * 0.9) * h0);
  for (std::size_t n = 1; n < traj.snapshots.size(); ++n) {
    EXPECT_LE(traj.snapshots[n].record.E_rel, traj.snapshots[n - 1].record.E_rel);
    EXPECT_NEAR(traj.snapshots[n].time, n * c.tau, 1e-12);
  }
}

TEST(Run, TwoBumpMassConstant) {
  const SmythHill s(kM);
  const InitialCondition ic = parse_initial_condition("two-bump:-0.6,0.7,0.5,0.8,0.3", kM);
  const JkoTrajectory traj = run(ic.quantiles(200), 0.1, small_config(), s);
  for (const Snapshot& snap : traj.snapshots)
    EXPECT_NEAR(snap.state.mass() / kM, 1.0, 1e-8);
}

TEST(Run, GridInputAndMassMismatch) {
  const SmythHill s(kM);
  const GridDensity g = s.sample(-1.5, 1e-3, 3001);
  const JkoTrajectory traj = run(g, 0.01, small_config(), s);
  EXPECT_EQ(traj.steps(), 10u);
  EXPECT_THROW(run(SmythHill(0.1).quantiles(200), 0.01, small_config(), s), std::invalid_argument);
}

TEST(Run, Deterministic) {
  const SmythHill s(kM);
  const auto a = run(s.quantiles(200).translated(0.3), 0.05, small_config(), s);
  const auto b = run(s.quantiles(200).translated(0.3), 0.05, small_config(), s);
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t n = 0; n < a.snapshots.size(); ++n) {
    const auto xa = a.snapshots[n].state.positions(), xb = b.snapshots[n].state.positions();
    EXPECT_EQ(std::memcmp(xa.data(), xb.data(), xa.size() * sizeof(double)), 0);
  }
}

TEST(Run, ExtendMatchesSingleRun) {
  const SmythHill s(kM);
  const auto whole = run(s.quantiles(200).translated(0.3), 0.04, small_config(), s);
  auto part = run(s.quantiles(200).translated(0.3), 0.02, small_config(), s);
  extend(part, 0.04, s);
  ASSERT_EQ(part.snapshots.size(), whole.snapshots.size());
  EXPECT_EQ(part.snapshots.back().record.H, whole.snapshots.back().record.H);
}

TEST(Run, ObserverCanStop) {
  const SmythHill s(kM);
  std::size_t calls = 0;
  const auto traj = run(s.quantiles(200).translated(0.3), 0.05, small_config(), s,
                        [&](const Snapshot&) { return ++calls < 5; });
  EXPECT_EQ(calls, 5u);
  EXPECT_EQ(traj.snapshots.size(), 5u);
}

TEST(WeakForm, EquilibriumAndVacuum) {
  const SmythHill s(kM);
  const JkoTrajectory traj = run(s.quantiles(400), 0.05, small_config(1e-3, 400), s);
  const auto tests = default_test_functions(traj);
  ASSERT_FALSE(tests.empty());
  for (double r : weak_form_residual(traj, tests)) EXPECT_LT(std::abs(r), 1e-3);
  const std::vector<TestFunction> vacuum{{3.0, 0.5, 0.025, 0.02}};
  EXPECT_EQ(weak_form_residual(traj, vacuum).at(0), 0.0);
}

TEST(WeakForm, DecreasesUnderRefinement) {
  const SmythHill s(kM);
  const std::vector<TestFunction> tests{{0.3, 0.6, 0.05, 0.04}};
  double previous = INFINITY;
  for (auto [tau, n] : {std::pair{2e-3, 100}, {1e-3, 200}, {5e-4, 400}}) {
    JkoConfig c;
    c.tau = tau;
    c.n_cells = static_cast<std::size_t>(n);
    const JkoTrajectory traj = run(s.quantiles(c.n_cells).translated(0.3), 0.1, c, s);
    const double r = std::abs(weak_form_residual(traj, tests).at(0));
    EXPECT_LT(r, previous) << tau;
    previous = r;
  }
}
