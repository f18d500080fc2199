#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "thinfilm/corpus.hpp"
#include "thinfilm/inequalities.hpp"
#include "thinfilm/transport.hpp"

using namespace thinfilm;

namespace {

constexpr double kM = 2.0 / 45.0;

// Equilibrium of mass kM (C = 1) shifted by d, on a fine grid.
GridDensity translate(double d, double dx = 1e-4) {
  const oracle::Profile p(kM);
  const double lo = -1.5 + std::min(d, 0.0);
  const auto count = static_cast<std::size_t>((3.0 + std::abs(d)) / dx) + 1;
  return GridDensity::sample([&](double x) { return p.v(x - d); }, lo, dx, count);
}

}  // namespace

TEST(Report, Orientation) {
  const InequalityReport r = make_report("x", 1.0, 2.0, 0.0);
  EXPECT_EQ(r.slack, 1.0);
  EXPECT_TRUE(r.passed);
  EXPECT_FALSE(make_report("x", 2.0, 1.0, 0.5).passed);
  EXPECT_TRUE(make_report("x", 2.0, 1.5, 0.5).passed);
}

TEST(Constants, Formulas) {
  const SmythHill s(kM);
  const double E = 0.01;
  const H1aConstants k = h1a_constants(s, E);
  EXPECT_DOUBLE_EQ(k.K1, 18.0);
  EXPECT_NEAR(k.sup_bound, std::cbrt(3.0 * kM * 2.0 * E), 1e-15);
  EXPECT_NEAR(k.K2, 16.0 + 6.0 * k.sup_bound + 2.0, 1e-14);
  EXPECT_FALSE(k.assembly.empty());
  const M4Constant m = m4_constant(kM, E);
  EXPECT_NEAR(m.K3, 81.0 / 4.0 * 24.0 / std::sqrt(6.0) * std::pow(m.sup_bound, 1.5), 1e-12);
  EXPECT_NEAR(sup_bound_printed(kM, E), 5.0 / 3.0 * std::pow(kM, 0.6) * std::pow(2 * E, 0.2),
              1e-15);
  EXPECT_NEAR(expd3_K(s, 0.04), 2.0 * std::sqrt(s.alpha()) * 0.2 + 0.04, 1e-15);
  EXPECT_NEAR(expd3_bound(3.0, 1.0, 2.0), (1.0 + std::exp(1.0) * 6.0) * std::exp(-2.0), 1e-14);
}

TEST(SupBound, OptimisedIsSharperThanPrintedOnEquilibrium) {
  // The sup of the profile is C^4/24; both bounds must hold.
  const SmythHill s(kM);
  const double sup = 1.0 / 24.0;
  EXPECT_LE(sup, sup_bound(kM, 2.0 * s.beta()));
  EXPECT_LE(sup, sup_bound_printed(kM, s.energy()));
}

TEST(H1, ExactIdentityOnTranslates) {
  // E_rel = (1/2)|f_x|^2 + int_{|x|>=C} (x^2/2 - C^2/6) v for equal masses,
  // so the slack of h1 is int_{|x|>=C} (x^2/6 - C^2/6) v >= 0.
  const oracle::Profile p(kM);
  for (double d : {0.0, 0.2, 0.6}) {
    const InequalityReport r = check_h1(translate(d), SmythHill(kM));
    auto vd = [&](double x) { return p.v(x - d); };
    auto vdx = [&](double x) { return p.vx(x - d); };
    const double grad =
        0.5 * oracle::simpson([&](double x) { return std::pow(vdx(x) - p.vx(x), 2); }, -2, 2, 40000);
    const double outer = oracle::simpson([&](double x) { return x * x * vd(x); }, 1.0, 1.0 + d, 4000);
    const double outer_c = oracle::simpson([&](double x) { return vd(x); }, 1.0, 1.0 + d, 4000);
    const double e_rel = 0.5 * kM * d * d;
    EXPECT_NEAR(e_rel, grad + 0.5 * outer - outer_c / 6.0, 1e-9) << d;
    EXPECT_NEAR(r.rhs, e_rel, 1e-7) << d;
    // The indicator of |x| >= C jumps on the grid: O(dx) quadrature error.
    EXPECT_NEAR(r.lhs, grad + outer / 3.0, 2e-6) << d;
    EXPECT_TRUE(r.passed);
  }
}

TEST(Talagrand, PrintedFormFailsOnTranslates) {
  // W2^2 = d^2 M and H_rel = alpha_rel = M d^2 / 2: W2^2 = 2 H_rel exactly.
  const SmythHill s(kM);
  const double d = 0.5;
  const GridDensity v = translate(d, 1e-3);
  const InequalityReport printed = check_talagrand(v, s);
  const InequalityReport half = check_talagrand_half(v, s);
  EXPECT_NEAR(printed.lhs, d * d * kM, 1e-6);
  EXPECT_NEAR(printed.rhs, 0.5 * d * d * kM, 1e-6);
  EXPECT_FALSE(printed.passed);
  EXPECT_TRUE(half.passed);
  EXPECT_NEAR(half.slack, 0.0, 1e-6);
}

TEST(Convexity, TranslatePairIsHalfConvex) {
  // Along translates H_t = H_inf + M (t d)^2 / 2, so the chord gap is
  // (1/2) t (1 - t) W2^2: lambda = 1/2 is sharp, lambda = 1 fails.
  const SmythHill s(kM);
  const QuantileDensity mu = s.quantiles(2000), nu = mu.translated(0.4);
  for (double t : {0.25, 0.5, 0.75}) {
    const InequalityReport one = check_displacement_convexity(mu, nu, t, 1.0);
    const InequalityReport half = check_displacement_convexity(mu, nu, t, 0.5);
    EXPECT_EQ(one.name, "convexity");
    EXPECT_FALSE(one.passed);
    EXPECT_NEAR(one.slack, -0.5 * t * (1 - t) * 0.16 * kM, 1e-12);
    EXPECT_TRUE(half.passed);
    EXPECT_NEAR(half.slack, 0.0, 1e-12);
  }
}

TEST(Entsecmo, TranslateValues) {
  const SmythHill s(kM);
  const double d = 0.3;
  const InequalityReport r = check_entsecmo(translate(d, 1e-3), s);
  const double h_rel = 0.5 * kM * d * d;
  EXPECT_NEAR(r.lhs, h_rel, 1e-7);
  EXPECT_NEAR(r.rhs, 2.0 * std::sqrt(s.alpha()) * std::sqrt(h_rel) + h_rel, 1e-6);
  EXPECT_TRUE(r.passed);
}

TEST(StaticSuite, EquilibriumIsTight) {
  const SmythHill s(kM);
  for (const InequalityReport& r : static_suite(s.sample(-1.5, 1e-3, 3001), s)) {
    EXPECT_TRUE(r.passed) << r.name;
    if (r.name != "infbnd") {
      EXPECT_NEAR(r.slack, 0.0, 1e-6) << r.name;
    }
  }
}

TEST(StaticSuite, MassMismatchRejected) {
  EXPECT_THROW(check_h1(SmythHill(0.05).sample(-1.5, 1e-3, 3001), SmythHill(kM)),
               std::invalid_argument);
}

TEST(StaticSuite, CorpusPassesExceptPrintedTalagrand) {
  const SmythHill s(kM);
  for (const CorpusEntry& e : bump_corpus(20, 99, s)) {
    for (const InequalityReport& r : static_suite(e.density, s)) {
      if (r.name != "talagrand") {
        EXPECT_TRUE(r.passed) << r.name << " slack " << r.slack;
      }
    }
    EXPECT_TRUE(check_talagrand_half(e.density, s).passed);
    EXPECT_TRUE(check_infbnd_optimised(e.density).passed);
  }
}

TEST(AlphaW2, RandomPairs) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> shift(-1.0, 1.0), scale(0.5, 2.0);
  const QuantileDensity base = SmythHill(kM).quantiles(400);
  for (int k = 0; k < 50; ++k) {
    const double a = scale(rng), b = shift(rng);
    const QuantileDensity other = pushforward(base, [&](double x) { return a * x + b; });
    EXPECT_TRUE(check_alpha_w2(base, other).passed);
  }
}

class DynamicRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const SmythHill s(kM);
    JkoConfig c;
    c.n_cells = 200;
    translated_ = new JkoTrajectory(run(s.quantiles(200).translated(0.5), 2.0, c, s));
    equilibrium_ = new JkoTrajectory(run(s.quantiles(200), 0.05, c, s));
  }
  static void TearDownTestSuite() {
    delete translated_;
    delete equilibrium_;
  }
  static JkoTrajectory* translated_;
  static JkoTrajectory* equilibrium_;
};

JkoTrajectory* DynamicRun::translated_ = nullptr;
JkoTrajectory* DynamicRun::equilibrium_ = nullptr;

TEST_F(DynamicRun, ExtraTermMakesFirstFormFailAtEquilibrium) {
  // At equilibrium D = 0 and the extra term is C^7/945 > 0, so the strengthened
  // first form reads 0 <= -C^7/945.
  const auto& s = equilibrium_->snapshots;
  const double tol = kDefaultDynamicTolerance.value(1e-3, 200);
  for (std::size_t n = 1; n < s.size(); ++n) {
    const auto reps = check_entropy_dissipation_step(s[n].record, s[n - 1].record, 1e-3, tol);
    ASSERT_EQ(reps.size(), 3u);
    EXPECT_EQ(reps[0].name, "Hdiscvx.first");
    EXPECT_FALSE(reps[0].passed);
    // The quantile extra term sits a few percent below C^7/945 at N = 200.
    EXPECT_NEAR(s[n].record.extra_dissipation, 1.0 / 945.0, 0.05 / 945.0);
    EXPECT_LT(reps[0].slack, -0.85 / 945.0);
    EXPECT_TRUE(reps[1].passed);
    EXPECT_TRUE(reps[2].passed);
  }
}

TEST_F(DynamicRun, TranslatedStepChecks) {
  const auto& s = translated_->snapshots;
  const double tol = kDefaultDynamicTolerance.value(1e-3, 200);
  for (std::size_t n = 1; n < s.size(); ++n) {
    const auto h = check_entropy_dissipation_step(s[n].record, s[n - 1].record, 1e-3, tol);
    EXPECT_TRUE(h[1].passed) << n;
    EXPECT_TRUE(h[2].passed) << n;
    const auto a = check_alpha_step(s[n], s[n - 1], 1e-3, tol);
    EXPECT_TRUE(a[0].passed) << n;
    // With the current index the inequality is an identity of the scheme.
    EXPECT_EQ(a[1].name, "barcba.current");
    EXPECT_NEAR(a[1].slack, 0.0, 1e-6) << n;
  }
}

TEST_F(DynamicRun, CumulativeAndWindowed) {
  const JkoTrajectory& t = *translated_;
  const double tol = kDefaultDynamicTolerance.value(1e-3, 200);
  const std::size_t last = t.snapshots.size() - 1;
  EXPECT_TRUE(check_h_dissp(t, last, tol * 2.0).passed);
  EXPECT_TRUE(check_free_estimate(t, last, tol).passed);
  EXPECT_TRUE(check_alphaineq1(t, 0, last, tol).passed);
  EXPECT_TRUE(check_alph_disp(t, last, tol).passed);
  EXPECT_TRUE(check_m4_bound(t, 1e-8).passed);
  EXPECT_TRUE(check_expd3(t, last, 1e-8).passed);
  EXPECT_EQ(first_entropy_increase(t), 0u);
}

TEST_F(DynamicRun, Expd3NeedsSpanTwo) {
  EXPECT_THROW(check_expd3(*equilibrium_, 10, 1e-8), std::invalid_argument);
}

TEST_F(DynamicRun, SuiteAndSummary) {
  const auto reports = dynamic_suite(*translated_);
  const auto summary = summarize(reports);
  bool saw_first = false;
  for (const SuiteSummary& s : summary) {
    if (s.name == "Hdiscvx.first") {
      saw_first = true;
      EXPECT_EQ(s.passed, 0u);
      EXPECT_NEAR(s.first_failure, 1e-3, 1e-12);
    } else {
      EXPECT_EQ(s.passed, s.checked) << s.name;
    }
  }
  EXPECT_TRUE(saw_first);
}

TEST(Calibration, FrozenConstantsCoverEquilibriumRuns) {
  const SmythHill s(kM);
  const std::vector<CalibrationSetting> settings{{1e-3, 200}, {1e-3, 400}, {5e-4, 400}};
  const DynamicTolerance fresh = calibrate_dynamic_tolerance(s, settings, 0.2, 2.0);
  EXPECT_GE(fresh.c1, 0.0);
  EXPECT_GT(fresh.c2, 0.0);
  for (const auto& k : settings)
    EXPECT_LE(fresh.value(k.tau, k.n_cells), kDefaultDynamicTolerance.value(k.tau, k.n_cells));
  EXPECT_THROW(calibrate_dynamic_tolerance(s, {}, 0.2, 2.0), std::invalid_argument);
}
