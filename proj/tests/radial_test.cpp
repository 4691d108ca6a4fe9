#include <cmath>

#include <gtest/gtest.h>

#include "sellab/error.hpp"
#include "sellab/profile.hpp"
#include "sellab/radial.hpp"

using namespace sellab;

namespace {

expr::ScalarFn fn(const char* src) { return expr::ScalarFn::parse(src, 0.0); }

LogisticProblem cubic_exterior() {
  LogisticProblem p;
  p.b = fn("t^2");
  p.f = analyze_nonlinearity("t^3");
  p.domain = DomainKind::Exterior;
  p.R0 = 0.0;
  p.R = 1.0;
  p.outer_value = std::sqrt(6.0);
  p.N = 1;
  return p;
}

BlowupOptions levels(int count) {
  BlowupOptions o;
  for (int j = 0; j < count; ++j) o.n_levels.push_back(10.0 * std::pow(4.0, j));
  return o;
}

}  // namespace

TEST(Potential, EnvelopesValidated) {
  EXPECT_THROW(RadialPotential::envelopes("1/(1+t)", "1"), PreconditionError);
  EXPECT_TRUE(RadialPotential::radial("1/(1+t)").is_radial());
  EXPECT_FALSE(RadialPotential::envelopes("2/(1+t)", "1/(1+t)").is_radial());
}

TEST(PsiWeight, ClosedForm) {
  // psi = 1/(t^2+2), Lambda_N = 1: Psi = ((r^2+2)/2)^(1/2)
  const PsiWeight P(fn("1/(t^2+2)"), 1.0);
  EXPECT_DOUBLE_EQ(P(0.0), 1.0);
  for (double r : {0.5, 3.0, 100.0, 1e4}) EXPECT_NEAR(P(r), std::sqrt((r * r + 2) / 2), 1e-9 * P(r));
}

TEST(SlowVariation, Examples) {
  const auto radial = check_slow_variation(RadialPotential::radial("1/(1+t^2)"), 1.0, 1e-8);
  ASSERT_TRUE(is_convergent(radial));
  EXPECT_EQ(std::get<Convergent>(radial).value, 0.0);

  const auto ex = check_slow_variation(
      RadialPotential::envelopes("(t^2+1)/((t^2+1)^2+1)", "1/(t^2+2)"), 1.0, 1e-4);
  EXPECT_TRUE(is_convergent(ex)) << describe(ex);

  const auto div = check_slow_variation(RadialPotential::envelopes("1/(1+t)", "0"), 1.0, 1e-6);
  EXPECT_TRUE(is_divergent(div)) << describe(div);
}

TEST(LargeCondition, Examples) {
  EXPECT_TRUE(is_divergent(check_large_condition(fn("1"), 3, 1e-6).outer));
  const LargeCondition c = check_large_condition(fn("(1+t)^(-3)"), 3, 1e-6);
  ASSERT_TRUE(is_convergent(c.outer));
  ASSERT_TRUE(is_convergent(c.bound));
  EXPECT_NEAR(std::get<Convergent>(c.bound).value, 0.5, 1e-6);
  EXPECT_LE(std::get<Convergent>(c.outer).value, 0.5);
  const LargeCondition z = check_large_condition(fn("0"), 3, 1e-6);
  ASSERT_TRUE(is_convergent(z.outer));
  EXPECT_EQ(std::get<Convergent>(z.outer).value, 0.0);
}

TEST(LargeCondition, IntegrandSeriesAtOrigin) {
  // I(t) ~ psi(0) t/N
  EXPECT_NEAR(large_condition_integrand(fn("1"), 3, 1e-6) / 1e-6, 1.0 / 3.0, 1e-5);
}

TEST(Picard, ZeroPotentialIsConstant) {
  const PicardResult r = picard_gradient_entire(fn("0"), analyze_nonlinearity("sqrt(t)"), 1.5, 5, 3, 1e-10);
  for (double u : r.w.u) EXPECT_DOUBLE_EQ(u, 1.5);
  EXPECT_LE(r.w.iterations, 2);
}

TEST(Picard, LargeCase) {
  const Nonlinearity f = analyze_nonlinearity("sqrt(t)");
  const PicardResult r = picard_gradient_entire(fn("1"), f, 1.0, 10, 3, 1e-10);
  EXPECT_TRUE(r.monotone);
  EXPECT_TRUE(r.growth_bound);
  EXPECT_EQ(r.w.classification, Classification::EntireLarge);
  for (std::size_t i = 1; i < r.w.u.size(); ++i) EXPECT_GE(r.w.u[i], r.w.u[i - 1]);
  const PicardResult r2 = picard_gradient_entire(fn("1"), f, 1.0, 20, 3, 1e-10);
  EXPECT_GT(r2.w.u.back(), 1.5 * r.w.u.back());
}

TEST(Picard, BoundedCase) {
  const Nonlinearity f = analyze_nonlinearity("sqrt(t)");
  const PicardResult a = picard_gradient_entire(fn("(1+t)^(-3)"), f, 1.0, 50, 3, 1e-10);
  const PicardResult b = picard_gradient_entire(fn("(1+t)^(-3)"), f, 1.0, 100, 3, 1e-10);
  EXPECT_EQ(b.w.classification, Classification::Bounded);
  EXPECT_NEAR(a.w.u.back(), b.w.u.back(), 1e-3);
}

TEST(Picard, OrderingWithEnvelopes) {
  PicardOptions o;
  o.phi = fn("(t^2+1)/((t^2+1)^2+1)");
  const PicardResult r =
      picard_gradient_entire(fn("1/(t^2+2)"), analyze_nonlinearity("sqrt(t)"), 2.0, 10, 3, 1e-8, o);
  ASSERT_TRUE(r.b_star.has_value());
  EXPECT_GE(*r.b_star, 1.0);
  ASSERT_TRUE(r.ordered.has_value());
  EXPECT_TRUE(*r.ordered);
}

TEST(System, LargeCaseLowerBound) {
  const Nonlinearity sq = analyze_nonlinearity("sqrt(t)");
  const SystemProblem sp{RadialPotential::radial("1"), RadialPotential::radial("1"), sq, sq, 1, 1};
  const SystemResult r = solve_system(sp, 20, 3, 1e-10);
  EXPECT_EQ(r.predicted, Classification::EntireLarge);
  EXPECT_EQ(r.observed, Classification::EntireLarge);
  EXPECT_TRUE(r.lower_bound);
  EXPECT_TRUE(r.monotone);
  for (std::size_t i = 0; i < r.sol.r.size(); ++i) {
    EXPECT_GE(r.sol.u[i], 1 + r.sol.r[i] * r.sol.r[i] / 6 - 1e-9);
  }
}

TEST(System, BoundedCase) {
  const Nonlinearity sq = analyze_nonlinearity("sqrt(t)");
  const SystemProblem sp{RadialPotential::radial("(1+t^2)^(-2)"), RadialPotential::radial("(1+t^2)^(-2)"),
                         sq, sq, 1, 1};
  const SystemResult r = solve_system(sp, 50, 3, 1e-10);
  EXPECT_EQ(r.predicted, Classification::Bounded);
  EXPECT_EQ(r.observed, Classification::Bounded);
}

TEST(System, ZeroPotentials) {
  const Nonlinearity sq = analyze_nonlinearity("sqrt(t)");
  const SystemProblem sp{RadialPotential::radial("0"), RadialPotential::radial("0"), sq, sq, 2, 3};
  const SystemResult r = solve_system(sp, 5, 3, 1e-10);
  for (double u : r.sol.u) EXPECT_DOUBLE_EQ(u, 2.0);
  for (double v : r.sol.v) EXPECT_DOUBLE_EQ(v, 3.0);
}

TEST(Lipschitz, Constants) {
  EXPECT_DOUBLE_EQ(lipschitz_constant(1, 1, 0), 1.0);
  EXPECT_NEAR(lipschitz_constant(1, 1, 1), 2 * std::exp(1.0), 1e-15);
  // (N-2)^-1 int_0^inf t (1+t^2)^-2 dt = 1/2 for N = 3
  EXPECT_NEAR(potential_constant(fn("(1+t^2)^(-2)"), 3), 0.5, 1e-7);
  EXPECT_THROW(potential_constant(fn("1"), 3), NumericalError);
  EXPECT_NEAR(lipschitz_on_range(fn("sqrt(t)"), 1, 4), 0.5, 1e-12);
}

TEST(Lipschitz, PairedRuns) {
  const Nonlinearity sq = analyze_nonlinearity("sqrt(t)");
  const RadialPotential p = RadialPotential::radial("(1+t^2)^(-2)");
  const SystemResult a = solve_system({p, p, sq, sq, 1.0, 1.0}, 30, 3, 1e-10);
  const SystemResult b = solve_system({p, p, sq, sq, 1.01, 1.01}, 30, 3, 1e-10);
  double diff = 0;
  for (std::size_t i = 0; i < a.sol.r.size(); ++i) {
    diff = std::max({diff, std::fabs(a.sol.u[i] - b.sol.u[i]), std::fabs(a.sol.v[i] - b.sol.v[i])});
  }
  EXPECT_LE(diff, lipschitz_constant(0.5, 0.5, 0.5) * 0.01);
}

TEST(DoubleIntegral, ConstantPotential) {
  const std::vector<double> r{0.0, 0.5, 1.0, 2.0};
  const std::vector<double> A = radial_double_integral(fn("1"), 3, r);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(A[i], r[i] * r[i] / 6, 1e-10);
}

TEST(Residual, Examples) {
  const std::vector<double> g{0, 0.5, 1, 2, 5, 10};
  const RadialRhs gradient = [](double r, double u, double du) {
    return u - std::pow(2.0, -1.5) * std::sqrt(r) * std::pow(std::fabs(du), 1.5);
  };
  EXPECT_LE(residual("t^2+6", gradient, 3, g), 1e-10);
  EXPECT_EQ(residual("1", [](double, double, double) { return 0.0; }, 3, g), 0.0);
  EXPECT_LE(residual("sin(t)", [](double, double u, double) { return -u; }, 1, g), 1e-12);
}

TEST(BoundaryBlowup, ExactSolution) {
  const LogisticProblem p = cubic_exterior();
  const RadialSolution s = boundary_blowup(p, 1e-10, levels(11));
  EXPECT_EQ(s.classification, Classification::BoundaryBlowup);
  int checked = 0;
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    if (!(s.u_err[i] <= 1e-4 * s.u[i])) continue;
    EXPECT_NEAR(s.u[i] * s.r[i] * s.r[i], std::sqrt(6.0), 1e-3 * std::sqrt(6.0)) << s.r[i];
    if (s.r[i] <= 0.1) ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(BoundaryBlowup, MonotoneInLevel) {
  std::vector<double> radii;
  const std::vector<RadialSolution> ls = boundary_blowup_levels(cubic_exterior(), 1e-10, levels(5), &radii);
  for (std::size_t j = 1; j < ls.size(); ++j) {
    for (std::size_t i = 0; i < radii.size(); ++i) EXPECT_GE(ls[j].u[i], ls[j - 1].u[i] * (1 - 1e-10));
  }
}

TEST(BoundaryBlowup, SerialAndParallelLevelsAgree) {
  BlowupOptions serial = levels(6), parallel = levels(6);
  serial.jobs = 1;
  parallel.jobs = 4;
  const RadialSolution a = boundary_blowup(cubic_exterior(), 1e-10, serial);
  const RadialSolution b = boundary_blowup(cubic_exterior(), 1e-10, parallel);
  EXPECT_EQ(solution_csv(a), solution_csv(b));
}

TEST(BoundaryBlowup, SingleLevelIsUndetermined) {
  const RadialSolution s = boundary_blowup(cubic_exterior(), 1e-10, levels(1));
  EXPECT_EQ(s.classification, Classification::Undetermined);
}

TEST(BoundaryBlowup, BallWithConstantWeight) {
  // u'' = u^3 on (-1, 1): u(d) d -> sqrt(2)
  LogisticProblem p;
  p.b = fn("1");
  p.f = analyze_nonlinearity("t^3");
  p.domain = DomainKind::Ball;
  p.R = 1.0;
  p.N = 1;
  const RadialSolution s = boundary_blowup(p, 1e-10, levels(11));
  const BlowupProfile prof =
      build_profile(p.f, power_k(0.0), ProfileVariant::KIntegrand, profile_grid(1.0, 30));
  const RateTable t = measure_boundary_rate(p, s, prof);
  // k = 1 has l1 = 1, so xi0 = 1 and xi0 h(d) = sqrt(2)/d
  EXPECT_NEAR(prof.xi0, 1.0, 1e-9);
  EXPECT_NEAR(t.limit, 1.0, 0.02);
}

TEST(BoundaryBlowup, RequiresKellerOsserman) {
  LogisticProblem p = cubic_exterior();
  p.f = analyze_nonlinearity("t");
  EXPECT_THROW(boundary_blowup(p, 1e-10, levels(4)), PreconditionError);
}

TEST(BoundaryBlowup, LinearTermBelowFirstEigenvalue) {
  LogisticProblem p;
  p.b = fn("1");
  p.f = analyze_nonlinearity("t^3");
  p.R = 1.0;
  p.N = 3;
  p.omega0_radius = 0.5;
  p.a_lin = 50.0;  // lambda_1 of the ball of radius 1/2 is 4 pi^2
  EXPECT_THROW(boundary_blowup(p, 1e-10, levels(4)), PreconditionError);
}

TEST(RateTable, Ratio) {
  const LogisticProblem p = cubic_exterior();
  const RadialSolution s = boundary_blowup(p, 1e-10, levels(11));
  const BlowupProfile prof =
      build_profile(p.f, power_k(1.0), ProfileVariant::KIntegrand, profile_grid(1.0, 30));
  const RateTable t = measure_boundary_rate(p, s, prof);
  EXPECT_EQ(t.rows.size(), 10u);
  EXPECT_NEAR(t.limit, 1.0, 0.02);
}

TEST(RateTable, VariantMismatchRefused) {
  const LogisticProblem p = cubic_exterior();
  const RadialSolution s = boundary_blowup(p, 1e-10, levels(5));
  const BlowupProfile prof =
      build_profile(p.f, power_k(1.0), ProfileVariant::SqrtKIntegrand, profile_grid(1.0, 10));
  EXPECT_THROW(measure_boundary_rate(p, s, prof), PreconditionError);
}
