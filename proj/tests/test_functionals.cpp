#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "thinfilm/corpus.hpp"
#include "thinfilm/functionals.hpp"

using namespace thinfilm;

namespace {

constexpr double kM = 2.0 / 45.0;

struct Reference {
  double alpha, beta, three_halves, m4, extra, l2, dirichlet;
};

// High-resolution Simpson quadrature of the C = 1 profile.
Reference reference() {
  const oracle::Profile p(kM);
  auto q = [](auto f) { return oracle::simpson(f, -1.0, 1.0, 200000); };
  Reference r;
  r.alpha = q([&](double x) { return 0.5 * x * x * p.v(x); });
  r.dirichlet = q([&](double x) { return p.vx(x) * p.vx(x); });
  r.beta = 0.5 * r.dirichlet;
  r.three_halves = q([&](double x) { return 2.0 * std::sqrt(2.0 / 3.0) * std::pow(p.v(x), 1.5); });
  r.m4 = q([&](double x) { return std::pow(x, 4) * p.v(x); });
  // v^{-3/2} v_x^4 = 24^{3/2} x^4 (1 - x^2) / 6^4 on the support.
  r.extra = std::sqrt(6.0) / 24.0 *
            q([&](double x) { return std::pow(24.0, 1.5) * std::pow(x, 4) * (1 - x * x) / 1296.0; });
  r.l2 = q([&](double x) { return p.v(x) * p.v(x); });
  return r;
}

}  // namespace

TEST(ClosedForms, MatchQuadrature) {
  const Reference r = reference();
  const SmythHill s(kM);
  EXPECT_NEAR(r.alpha, 1.0 / 315.0, 1e-14);
  EXPECT_NEAR(r.beta, 2.0 / 945.0, 1e-14);
  EXPECT_NEAR(r.alpha + r.three_halves, 1.0 / 63.0, 1e-14);
  EXPECT_NEAR(r.m4, 2.0 / 945.0, 1e-14);
  EXPECT_NEAR(s.alpha(), r.alpha, 1e-14);
  EXPECT_NEAR(s.beta(), r.beta, 1e-14);
  EXPECT_NEAR(s.energy(), 1.0 / 189.0, 1e-14);
  EXPECT_NEAR(s.entropy(), 1.0 / 63.0, 1e-14);
  EXPECT_NEAR(s.fourth_moment(), r.m4, 1e-14);
  EXPECT_NEAR(s.extra_dissipation(), r.extra, 1e-12);
  EXPECT_NEAR(s.l2_norm_sq(), r.l2, 1e-14);
  EXPECT_NEAR(2.0 * s.alpha(), 3.0 * s.beta(), 1e-15);
}

TEST(QuantileForms, EquilibriumAt2000) {
  const SmythHill s(kM);
  const QuantileDensity q = s.quantiles(2000);
  EXPECT_NEAR(alpha(q), 1.0 / 315.0, 1e-6);
  EXPECT_NEAR(beta(q), 2.0 / 945.0, 1e-6);
  EXPECT_NEAR(entropy(q), 1.0 / 63.0, 1e-6);
  EXPECT_NEAR(moment(q, 4), 2.0 / 945.0, 1e-6);
  EXPECT_NEAR(dissipation(q).D, 0.0, 1e-6);
  // beta converges at first order through its edge closure.
  EXPECT_NEAR(2.0 * alpha(q), 3.0 * beta(q), 2e-6);
  const FunctionalRecord r = record(q, 0.0, s);
  EXPECT_NEAR(r.H_rel, 0.0, 1e-6);
  EXPECT_NEAR(r.E_rel, 0.0, 1e-6);
}

TEST(GridForms, EquilibriumSamples) {
  const SmythHill s(kM);
  const GridDensity g = s.sample(-1.5, 1e-4, 30001);
  EXPECT_NEAR(alpha(g), 1.0 / 315.0, 1e-8);
  EXPECT_NEAR(beta(g), 2.0 / 945.0, 1e-7);
  EXPECT_NEAR(entropy(g), 1.0 / 63.0, 1e-7);
  EXPECT_NEAR(energy(g), alpha(g) + beta(g), 1e-10 * energy(g));
  EXPECT_NEAR(moment(g, 4), 2.0 / 945.0, 1e-8);
  EXPECT_NEAR(moment(g, 2), 2.0 * alpha(g), 1e-15);
  EXPECT_NEAR(sup_norm(g), 1.0 / 24.0, 1e-12);
  EXPECT_NEAR(dissipation(g).D, 0.0, 1e-6);
  EXPECT_NEAR(dissipation(g).extra, reference().extra, 1e-4);
}

TEST(GridForms, UniformSecondMoment) {
  const GridDensity g(-1.0, 1e-3, std::vector<double>(2001, 1.0));
  EXPECT_NEAR(alpha(g), 1.0 / 3.0, 1e-6);
  EXPECT_THROW(alpha(GridDensity(0.0, 1.0, std::vector<double>(7, 1.0))), std::invalid_argument);
}

TEST(Translation, AlphaShiftAndBetaInvariant) {
  const SmythHill s(kM);
  const double d = 0.37;
  const QuantileDensity q = s.quantiles(800);
  const QuantileDensity qd = q.translated(d);
  // <x> = 0 for the even profile.
  EXPECT_NEAR(alpha(qd) - alpha(q), 0.5 * d * d * kM, 1e-12);
  EXPECT_NEAR(beta(qd), beta(q), 1e-12);
  const GridDensity g = s.sample(-1.5, 1e-3, 3001);
  const GridDensity gd(g.x_min() + d, g.dx(), {g.values().begin(), g.values().end()});
  EXPECT_NEAR(alpha(gd) - alpha(g), 0.5 * d * d * g.mass(), 1e-10);
  EXPECT_NEAR(beta(gd), beta(g), 1e-14);
}

TEST(Translation, DissipationEqualsD2M) {
  const SmythHill s(kM);
  for (double d : {0.1, 0.5}) {
    const QuantileDensity q = s.quantiles(2000).translated(d);
    EXPECT_NEAR(dissipation(q).D, d * d * kM, 2e-6) << d;
  }
}

TEST(Scaling, EntropyParts) {
  // v_l(x) = l v(l x): three-halves part scales by l^{1/2}, x^2 part by l^{-2}.
  auto f = [](double x) { return std::exp(-x * x); };
  const GridDensity g = GridDensity::sample(f, -8.0, 1e-3, 16001);
  const double l = 1.7;
  const GridDensity gl = GridDensity::sample([&](double x) { return l * f(l * x); }, -8.0 / l,
                                             1e-3 / l, 16001);
  const double a = alpha(g), al = alpha(gl);
  EXPECT_NEAR(al / a, 1.0 / (l * l), 1e-10);
  EXPECT_NEAR((entropy(gl) - al) / (entropy(g) - a), std::sqrt(l), 1e-8);
}

TEST(Symmetry, OddPerturbationKeepsAlpha) {
  const SmythHill s(kM);
  auto base = [&](double x) { return s.value(x); };
  auto odd = [&](double x) { return s.value(x) * (1.0 + 0.3 * x); };
  const GridDensity g = GridDensity::sample(base, -1.5, 1e-3, 3001);
  const GridDensity h = GridDensity::sample(odd, -1.5, 1e-3, 3001);
  EXPECT_NEAR(alpha(g), alpha(h), 1e-14);
}

TEST(WeightedNorm, ZeroAndProfile) {
  std::vector<double> zero(101, 0.0);
  EXPECT_EQ(weighted_norm_sq(-1.0, 0.02, zero, 1.0), 0.0);
  const SmythHill s(kM);
  const GridDensity g = s.sample(-1.5, 1e-4, 30001);
  const Reference r = reference();
  EXPECT_NEAR(weighted_norm_sq(g.x_min(), g.dx(), g.values(), 0.0), 2.0 * r.l2 + r.dirichlet,
              1e-7);
  // m = 1 on an even f: int (1 + x^2) f^2 + int f_x^2.
  const oracle::Profile p(kM);
  const double x2 = oracle::simpson([&](double x) { return x * x * p.v(x) * p.v(x); }, -1, 1);
  EXPECT_NEAR(weighted_norm_sq(g.x_min(), g.dx(), g.values(), 1.0), r.l2 + x2 + r.dirichlet,
              1e-7);
}

TEST(WeightedNorm, MismatchedGrids) {
  const SmythHill s(kM);
  EXPECT_THROW(weighted_norm_sq(s.sample(-1.5, 1e-3, 3001), s.sample(-1.5, 1e-3, 3002), 1.0),
               std::invalid_argument);
}

TEST(Record, RelativeFieldsAndIdentity) {
  const SmythHill s(kM);
  const FunctionalRecord r = record(s.quantiles(400).translated(0.5), 0.0, s);
  EXPECT_GT(r.H_rel, 0.0);
  EXPECT_GT(r.E_rel, 0.0);
  EXPECT_NEAR(r.E_rel, r.alpha_rel + r.beta_rel, 1e-10 * std::abs(r.E_rel));
  EXPECT_GE(r.M4, 0.0);
  EXPECT_GE(r.extra_dissipation, 0.0);
  EXPECT_THROW(record(SmythHill(0.05).quantiles(400), 0.0, s), std::invalid_argument);
}

TEST(Record, BumpMixturesSatisfyIdentity) {
  const SmythHill s(kM);
  for (const CorpusEntry& e : bump_corpus(10, 7, s, 2e-3)) {
    const FunctionalRecord r = record(e.density, 0.0, s);
    EXPECT_NEAR(r.E_rel, r.alpha_rel + r.beta_rel, 1e-10 * std::max(std::abs(r.E_rel), 1e-12));
    EXPECT_GE(r.H_rel, -1e-6);
    EXPECT_GE(r.D, 0.0);
  }
}

TEST(GridVsQuantile, AgreeOnSmoothDensity) {
  auto f = [](double x) { return std::exp(-2.0 * (x - 0.2) * (x - 0.2)) * 0.02; };
  const GridDensity g = GridDensity::sample(f, -6.0, 2e-3, 6001);
  const QuantileDensity q = grid_to_quantile(g, 400);
  EXPECT_NEAR(alpha(q) / alpha(g), 1.0, 0.02);
  EXPECT_NEAR(energy(q) / energy(g), 1.0, 0.02);
  EXPECT_NEAR(entropy(q) / entropy(g), 1.0, 0.02);
}
