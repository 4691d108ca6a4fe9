#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sellab/bifurcation.hpp"
#include "sellab/error.hpp"

using namespace sellab;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

// first zero of J0 by Newton on its power series
double j0_zero() {
  auto j0 = [](double x) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 60; ++k) {
      term *= -(x * x / 4) / (k * k);
      sum += term;
    }
    return sum;
  };
  double x = 2.4;
  for (int i = 0; i < 50; ++i) x -= j0(x) / ((j0(x + 1e-7) - j0(x - 1e-7)) / 2e-7);
  return x;
}

}  // namespace

TEST(Eigen, KnownValues) {
  EXPECT_NEAR(lambda1_ball(3, 1.0).lambda1, kPi2, 1e-8);
  EXPECT_NEAR(lambda1_ball(1, 1.0).lambda1, kPi2 / 4, 1e-8);
  EXPECT_NEAR(lambda1_ball(1, 1.0, EigenMode::Interval).lambda1, kPi2, 1e-8);
  const double z = j0_zero();
  EXPECT_NEAR(lambda1_ball(2, 1.0).lambda1, z * z, 1e-7);
}

TEST(Eigen, Scaling) {
  for (int N : {1, 2, 3, 5}) {
    const double l1 = lambda1_ball(N, 1.0).lambda1;
    for (double R : {0.5, 2.0, 7.0}) EXPECT_NEAR(lambda1_ball(N, R).lambda1 * R * R, l1, 1e-7 * l1);
  }
  EXPECT_EQ(lambda_inf_1(3, 0.0), kInf);
  EXPECT_NEAR(lambda_inf_1(3, 2.0), kPi2 / 4, 1e-8);
}

TEST(Eigen, EigenfunctionAndCsv) {
  const EigenResult e = lambda1_ball(3, 1.0);
  EXPECT_NEAR(e.phi.front(), 1.0, 1e-12);
  EXPECT_NEAR(e.phi_end, 0.0, 1e-7);
  EXPECT_LE(e.residual, 1e-6);
  EXPECT_EQ(eigen_csv(e), eigen_csv(lambda1_ball(3, 1.0)));
}

TEST(Lef, TorsionFunction) {
  // -u'' = 1 on (0, 1): u = x(1 - x)/2
  LEFProblem p = make_lef(LefMode::Linear, "1", "0", 1);
  p.lambda = 1.0;
  const LefResult r = solve_lef(p);
  ASSERT_TRUE(r.solved);
  EXPECT_NEAR(r.sup_norm, 0.125, 1e-6);
  for (std::size_t i = 0; i < r.sol.r.size(); ++i) {
    const double x = r.sol.r[i];
    EXPECT_NEAR(r.sol.u[i], x * (1 - x) / 2, 1e-6) << x;
  }
}

TEST(Lef, SingularSolutionIsLinearNearBoundary) {
  LEFProblem p = make_lef(LefMode::Linear, "t", "t^(-1/2)", 1);
  p.lambda = 0.5 * kPi2;
  const LefResult r = solve_lef(p);
  ASSERT_TRUE(r.solved);
  EXPECT_TRUE(r.d_bounds);
  EXPECT_GT(r.c1, 0.0);
  EXPECT_FALSE(r.flagged);
}

TEST(Sweep, ThresholdNearLambdaStar) {
  LEFProblem p = make_lef(LefMode::Linear, "t", "t^(-1/2)", 1);
  EXPECT_NEAR(p.lambda_star(), kPi2, 1e-8);
  const std::vector<double> grid{0.1 * kPi2, 0.5 * kPi2, 0.9 * kPi2, 0.95 * kPi2, 1.05 * kPi2, 1.1 * kPi2};
  const BifurcationDiagram d = sweep(p, grid, 1);
  ASSERT_TRUE(d.bracket.has_value());
  EXPECT_LE(d.bracket->first, kPi2);
  EXPECT_GE(d.bracket->second, kPi2);
  EXPECT_TRUE(d.monotone);
  for (const SweepPoint& s : d.points) {
    EXPECT_EQ(s.status, s.lambda < kPi2 ? SweepStatus::Solved : SweepStatus::NoSolution) << s.lambda;
  }
}

TEST(Sweep, SerialAndParallelAgree) {
  LEFProblem p = make_lef(LefMode::Linear, "t", "t^(-1/2)", 1);
  std::vector<double> grid;
  for (int i = 1; i <= 8; ++i) grid.push_back(0.14 * i * kPi2);
  const BifurcationDiagram a = sweep(p, grid, 1);
  const BifurcationDiagram b = sweep(p, grid, 4);
  EXPECT_EQ(diagram_csv(a), diagram_csv(b));
}

TEST(Gelfand, Predicate) {
  EXPECT_TRUE(gelfand_solvable(1.0, 0.0, 1.0, kPi2));
  EXPECT_FALSE(gelfand_solvable(1.0, 2 * kPi2, 1.0, kPi2));
}

TEST(Gelfand, TransformRoundTrip) {
  RadialSolution s;
  s.r = {0.0, 0.25, 0.5, 1.0};
  s.u = {1.0, 0.8, 0.4, 0.0};
  s.du = {0.0, -1.0, -1.5, -2.0};
  const RadialSolution v = gelfand_transform(s, 0.7, GelfandDirection::Forward);
  EXPECT_NEAR(v.u[0], std::expm1(0.7), 1e-15);
  EXPECT_NEAR(v.du[1], 0.7 * std::exp(0.56) * -1.0, 1e-14);
  const RadialSolution back = gelfand_transform(v, 0.7, GelfandDirection::Back);
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    EXPECT_NEAR(back.u[i], s.u[i], 1e-14);
    EXPECT_NEAR(back.du[i], s.du[i], 1e-14);
  }
}

TEST(Gelfand, RhsClosedForm) {
  // g = 1: Phi(v) = lambda (v + 1) (1 + mu)
  const expr::ScalarFn phi = gelfand_rhs(expr::ScalarFn::parse("1"), 2.0, 0.5);
  for (double v : {0.0, 1.0, 3.0}) EXPECT_NEAR(phi(v), 2.0 * (v + 1) * 1.5, 1e-14);
}

TEST(Young, Constant) {
  const YoungConstant y = young_constant(0.0, 1.5, 1.2);
  EXPECT_DOUBLE_EQ(y.C, 0.25);
  EXPECT_LT(2 * y.cc_lhs, 1.2);
  // the derived inequality holds; the transposed exponents do not
  EXPECT_LE(y.inq_derived_max, 0.0);
  EXPECT_GT(y.inq_max, 0.0);
  EXPECT_THROW(young_constant(0.0, 2.5, 1.0), PreconditionError);
}
