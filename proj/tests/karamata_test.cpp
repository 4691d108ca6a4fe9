#include <cmath>

#include <gtest/gtest.h>

#include "sellab/error.hpp"
#include "sellab/karamata.hpp"

using namespace sellab;

TEST(RvIndex, Examples) {
  const RvIndex a = rv_index([](double t) { return t * t * t; });
  EXPECT_NEAR(a.value, 3.0, 1e-6);
  EXPECT_TRUE(a.regular);
  // slowly varying: the estimate is biased by about 1/ln(u_max)
  EXPECT_NEAR(rv_index([](double t) { return std::log1p(t); }).value, 1 / std::log(1e8), 0.01);
  EXPECT_NEAR(rv_index([](double t) { return std::log1p(t); }, 1e300).value, 0.0, 0.02);
  EXPECT_NEAR(rv_index([](double t) { return t * t * std::log1p(t); }).value, 2.0, 0.06);
  EXPECT_FALSE(rv_index([](double t) { return std::exp(t / 1e7); }).regular);
}

TEST(AnalyzeNonlinearity, Cubic) {
  const Nonlinearity f = analyze_nonlinearity("t^3");
  ASSERT_TRUE(f.theta.finite());
  EXPECT_NEAR(f.theta.value, 3.0, 1e-6);
  EXPECT_NEAR(f.gamma.value, 0.25, 1e-6);
  EXPECT_NEAR(f.rho.value, 2.0, 1e-6);
  EXPECT_EQ(f.m.kind, Limit::Kind::PlusInfinity);
  EXPECT_EQ(f.Lambda.kind, Limit::Kind::PlusInfinity);
  EXPECT_NEAR(f.F(2.0), 4.0, 1e-12);
}

TEST(AnalyzeNonlinearity, Linear) {
  const Nonlinearity f = analyze_nonlinearity("t");
  EXPECT_NEAR(f.m.value, 1.0, 1e-9);
  EXPECT_NEAR(f.theta.value, 1.0, 1e-9);
  EXPECT_NEAR(f.gamma.value, 0.5, 1e-6);
  EXPECT_NEAR(f.rho.value, 0.0, 1e-6);
  EXPECT_TRUE(is_divergent(keller_osserman(f, 1e-6)));
}

TEST(AnalyzeNonlinearity, ExponentialIsFasterThanPowers) {
  const Nonlinearity f = analyze_nonlinearity("exp(t)-1", 700.0);
  EXPECT_EQ(f.theta.kind, Limit::Kind::PlusInfinity);
}

TEST(AnalyzeNonlinearity, RemarkIdentities) {
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const Nonlinearity f = analyze_nonlinearity(expr::ScalarFn(expr::pow(expr::variable(), expr::constant(p))));
    EXPECT_NEAR(f.gamma.value, 1.0 / (f.rho.value + 2.0), 1e-3) << p;
    EXPECT_NEAR(f.theta.value, f.rho.value + 1.0, 1e-3) << p;
  }
}

TEST(AnalyzeNonlinearity, RejectsDecreasing) {
  EXPECT_THROW(analyze_nonlinearity("1/(1+t)"), PreconditionError);
  EXPECT_THROW(analyze_nonlinearity("t-1"), PreconditionError);
}

TEST(AnalyzeNonlinearity, AntiderivativeMatchesF) {
  const Nonlinearity f = analyze_nonlinearity("t*ln(1+t)");
  for (double u : {0.5, 3.0, 100.0, 1e5}) {
    const double h = 1e-5 * u;
    EXPECT_NEAR((f.F(u + h) - f.F(u - h)) / (2 * h), u * std::log1p(u), 1e-6 * u * std::log1p(u));
  }
}

TEST(KellerOsserman, Examples) {
  EXPECT_TRUE(is_convergent(keller_osserman(analyze_nonlinearity("t^2"), 1e-6)));
  EXPECT_TRUE(is_divergent(keller_osserman(analyze_nonlinearity("t*ln(1+t)"), 1e-6)));
  EXPECT_TRUE(is_convergent(keller_osserman(analyze_nonlinearity("t*ln(1+t)^4"), 1e-4)));
}

TEST(NecessaryCondition, Examples) {
  const auto v = necessary_condition_entire(analyze_nonlinearity("t^2"));
  ASSERT_TRUE(is_convergent(v));
  EXPECT_NEAR(std::get<Convergent>(v).value, 1.0, 1e-7);
  EXPECT_TRUE(is_divergent(necessary_condition_entire(analyze_nonlinearity("t"))));
  EXPECT_TRUE(is_convergent(necessary_condition_entire(analyze_nonlinearity("t*ln(1+t)^2"), 1e-4)));
}

TEST(EllLimits, Examples) {
  const EllLimits a = ell_limits(expr::ScalarFn::parse("t^2"), 1.0);
  EXPECT_NEAR(a.ell0, 0.0, 1e-9);
  EXPECT_NEAR(a.ell1, 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(ell_limits(expr::ScalarFn::parse("exp(-1/t)"), 1.0).ell1, 0.0, 1e-3);
  EXPECT_NEAR(ell_limits(expr::ScalarFn::parse("1/ln(1/t)"), 0.5).ell1, 1.0, 0.03);
}

TEST(EllLimits, PowerFamily) {
  for (double a : {0.5, 1.0, 2.0, 4.0}) {
    const KFunction k = power_k(a);
    EXPECT_NEAR(k.ell1, 1.0 / (a + 1.0), 1e-3) << a;
    EXPECT_NEAR(k.ell0, 0.0, 1e-9);
  }
}

TEST(MakeK, Constructors) {
  const KFunction b = make_k(KKind::InvS, "t^2", 1.0);
  ASSERT_TRUE(b.ell1_predicted.has_value());
  EXPECT_NEAR(*b.ell1_predicted, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(b.ell1, 1.0 / 3.0, 2e-2);
  EXPECT_NEAR(make_k(KKind::ExpA, "t", 1.0).ell1, 0.0, 2e-2);
  EXPECT_NEAR(make_k(KKind::InvLnS, "t^3", 2.0).ell1, 1.0, 2e-2);
  EXPECT_THROW(make_k(KKind::InvS, "2-1/(1+t)", 1.0), PreconditionError);
}

TEST(Xi0, ClosedForm) {
  EXPECT_NEAR(xi0_power(2, 0.5, 1), std::sqrt(3.0) / 2, 1e-15);
  EXPECT_NEAR(xi0_power(2, 0, 1), 1 / std::sqrt(2.0), 1e-15);
  for (double rho : {0.5, 1.0, 3.0}) {
    for (double l1 : {0.0, 0.3, 1.0}) {
      EXPECT_NEAR(xi0_power(rho, l1, (2 + l1 * rho) / (2 + rho)), 1.0, 1e-14);
    }
  }
  EXPECT_THROW(xi0_power(0, 0.5, 1), PreconditionError);
}

TEST(Xi0, ViaGrowthRatio) {
  const Nonlinearity cubic = analyze_nonlinearity("t^3");
  EXPECT_NEAR(xi0_via_A(cubic, 0.25, 0.5, 1.0), std::sqrt(0.75), 1e-6);
  EXPECT_NEAR(xi0_via_A(cubic, 0.25, 1.0, 0.75), std::sqrt(4.0 / 3.0), 1e-6);
  EXPECT_NEAR(xi0_via_A(analyze_nonlinearity("t^2"), 1.0 / 3.0, 1.0, 1.0), 1.0, 1e-6);
  for (double rho : {1.0, 2.0, 3.0}) {
    const Nonlinearity f = analyze_nonlinearity("t^" + std::to_string(static_cast<int>(rho + 1)));
    const double gamma = 1 / (rho + 2), l1 = 0.5;
    // K'(0) = 1 - l1 puts both targets on (2 + l1 rho)/(2 + rho)
    EXPECT_NEAR(xi0_via_A(f, gamma, 1 - l1, 1.0), xi0_power(rho, l1, 1.0), 1e-6) << rho;
  }
}

TEST(Xi0, GrowthRatioIsIncreasing) {
  const expr::ScalarFn f = expr::ScalarFn::parse("t^3+t");
  double prev = 0.0;
  for (double xi = 0.1; xi < 10; xi *= 1.3) {
    const double a = growth_ratio(f, xi);
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(TwoTerm, Branches) {
  TwoTermSpec s;
  s.rho = 2;
  s.zeta = 1;
  s.ell_lower = -1;
  s.c_tilde = 3;
  s.theta = 0.5;
  TwoTerm r = chi_two_term(s);
  EXPECT_DOUBLE_EQ(r.varpi, 0.5);
  EXPECT_NEAR(r.chi, -3.0 / 2.0, 1e-15);
  s.theta = 2;
  r = chi_two_term(s);
  EXPECT_DOUBLE_EQ(r.varpi, 1.0);
  EXPECT_NEAR(r.chi, 1.0, 1e-15);
  s.theta = 1;
  r = chi_two_term(s);
  EXPECT_TRUE(r.tie_warning);
  EXPECT_NEAR(r.chi, 0.5 * 1.0 + 0.5 * -1.5, 1e-15);
  EXPECT_DOUBLE_EQ(heaviside(0.0), 0.5);
}

TEST(TwoTerm, EtaZeroTauIndependentFormula) {
  TwoTermSpec s;
  s.rho = 2;
  s.zeta = 1;
  s.theta = 2;
  s.ell_lower = -1;
  s.ell_upper = 1;
  s.kind = TwoTermCase::EtaZeroTau;
  const TwoTerm r = chi_two_term(s);
  const double varpi = 1.0, tau1 = varpi / s.zeta;
  const double xi0 = std::pow(2.0 / (2.0 + s.rho), 1.0 / s.rho);
  const double chi1 = -(1 + s.zeta) * s.ell_lower / (2 * s.zeta);
  const double expected =
      chi1 - s.ell_upper / s.rho * std::pow(-s.rho * s.ell_lower / 2, tau1) *
                 (1 / (s.rho + 2) + std::log(xi0));
  EXPECT_NEAR(r.tau1, tau1, 1e-15);
  EXPECT_NEAR(r.chi, expected, 1e-14);
}
