#include <cmath>

#include <gtest/gtest.h>

#include "sellab/error.hpp"
#include "sellab/profile.hpp"

using namespace sellab;

namespace {

BlowupProfile cubic_profile() {
  return build_profile(analyze_nonlinearity("t^3"), power_k(1.0), ProfileVariant::KIntegrand,
                       profile_grid(1.0, 30));
}

}  // namespace

TEST(Profile, CubicClosedForm) {
  const BlowupProfile p = cubic_profile();
  EXPECT_NEAR(p.solve(0.1), 200 * std::sqrt(2.0), 1e-8 * 282.0);
  EXPECT_NEAR(p(0.1), 200 * std::sqrt(2.0), 1e-6 * 282.0);
  for (double y : {1.0, 10.0, 1e4}) EXPECT_NEAR(p.Phi(y), std::sqrt(2.0) / y, 1e-10 * std::sqrt(2.0) / y);
  EXPECT_NEAR(p.xi0, std::sqrt(0.75), 1e-12);
  EXPECT_LE(p.max_roundtrip_err, 1e-10);
}

TEST(Profile, RoundTrip) {
  const BlowupProfile p = cubic_profile();
  EXPECT_NEAR(p.solve(1.0), 2 * std::sqrt(2.0), 1e-10);
  for (double t : {0.01, 0.3, 1.0}) EXPECT_NEAR(p.Phi(p.solve(t)), t * t / 2, 1e-10 * t * t / 2);
  const BlowupProfile q = build_profile(analyze_nonlinearity("t^2"), power_k(0.5),
                                        ProfileVariant::SqrtKIntegrand, profile_grid(1.0, 20));
  EXPECT_LE(q.max_roundtrip_err, 1e-8);
}

TEST(Profile, TableIsDecreasingAndRefusesExtrapolation) {
  const BlowupProfile p = cubic_profile();
  const ProfileChecks c = check_profile(p);
  EXPECT_TRUE(c.decreasing);
  EXPECT_THROW(p(2.0), PreconditionError);
}

TEST(Profile, H2Limit) {
  const BlowupProfile p = cubic_profile();
  const ProfileChecks c = check_profile(p);
  ASSERT_FALSE(c.h2_ratio.empty());
  // (2 + rho l1)/(2 + rho) with rho = 2, l1 = 1/2
  EXPECT_NEAR(c.h2_predicted, 0.75, 1e-12);
  EXPECT_NEAR(c.h2_ratio.front(), 0.75, 0.02 * 0.75);
  EXPECT_LT(std::fabs(c.h_over_hpp.front()), std::fabs(c.h_over_hpp.back()));
}

TEST(Profile, RequiresKellerOsserman) {
  EXPECT_THROW(build_profile(analyze_nonlinearity("t"), power_k(1.0), ProfileVariant::KIntegrand,
                             profile_grid(1.0, 10)),
               PreconditionError);
}

TEST(PredictedRate, OneAndTwoTerm) {
  BlowupProfile p = cubic_profile();
  for (double d : {0.01, 0.1, 0.3}) {
    EXPECT_NEAR(predicted_rate(p, d, RateOrder::One), std::sqrt(6.0) / (d * d), 1e-6 * std::sqrt(6.0) / (d * d));
  }
  EXPECT_THROW(predicted_rate(p, 0.1, RateOrder::Two), PreconditionError);
  p.chi = 0.0;
  p.varpi = 1.0;
  EXPECT_DOUBLE_EQ(predicted_rate(p, 0.1, RateOrder::Two), predicted_rate(p, 0.1, RateOrder::One));
  EXPECT_THROW(predicted_rate(p, 5.0, RateOrder::One), PreconditionError);
}

TEST(ProfileCsv, Deterministic) {
  const std::string a = profile_csv(cubic_profile());
  EXPECT_EQ(a, profile_csv(cubic_profile()));
  EXPECT_NE(a.find("\nt,h,h_prime"), std::string::npos);
}

TEST(OdeProfile, PowerSolution) {
  const Nonlinearity g = analyze_nonlinearity("t^(-1/2)", 1e8, false);
  const OdeProfile p = profile_ode_g(g, 1.0, 1e-4);
  EXPECT_NEAR(p.alpha, 0.5, 1e-9);
  EXPECT_NEAR(p.beta, 4.0 / 3.0, 1e-12);
  const double C = std::pow(9.0 / 4.0, 2.0 / 3.0);
  EXPECT_NEAR(p.C, C, 1e-9);
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    EXPECT_NEAR(p.h[i], C * std::pow(p.t[i], 4.0 / 3.0), 1e-4 * p.h[i]);
  }
  const OdeProfileChecks c = check_ode_profile(p, g);
  EXPECT_TRUE(c.has_bound);
  EXPECT_TRUE(c.h_increasing);
  EXPECT_TRUE(c.hp_increasing);
  EXPECT_TRUE(c.hpp_nonincreasing);
  EXPECT_TRUE(c.lh_bound);
}

TEST(OdeProfile, NonPowerNonlinearity) {
  const Nonlinearity g = analyze_nonlinearity("t^(-1/3)+1", 1e8, false);
  const OdeProfile p = profile_ode_g(g, 2.0, 1e-3);
  const OdeProfileChecks c = check_ode_profile(p, g);
  EXPECT_TRUE(c.has_bound);
  EXPECT_TRUE(c.h_increasing);
  EXPECT_TRUE(c.hp_increasing);
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    const double G = 1.5 * std::pow(p.h[i], 2.0 / 3.0) + p.h[i];
    EXPECT_NEAR(p.hp[i] * p.hp[i], 2 * G, 1e-6 * 2 * G);
  }
}

TEST(OdeProfile, OriginDivergentRejected) {
  const Nonlinearity g = analyze_nonlinearity("1/t", 1e8, false);
  EXPECT_THROW(profile_ode_g(g, 1.0), PreconditionError);
}
