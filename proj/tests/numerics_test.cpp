#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "sellab/error.hpp"
#include "sellab/numerics.hpp"

using namespace sellab;

TEST(Quadrature, Examples) {
  EXPECT_NEAR(integrate_finite([](double t) { return t; }, 0, 1, 1e-12).value, 0.5, 1e-12);
  EXPECT_NEAR(integrate_finite([](double t) { return std::sin(t); }, 0, std::numbers::pi, 1e-12).value,
              2.0, 1e-12);
  EXPECT_NEAR(integrate_finite([](double t) { return 1 / std::sqrt(t); }, 0, 1, 1e-10).value, 2.0,
              1e-9);
}

TEST(Quadrature, PolynomialsExact) {
  for (int deg = 0; deg <= 5; ++deg) {
    const QuadResult q = gauss_kronrod([deg](double t) { return std::pow(t, deg); }, 0, 1, 1e-15, 1e-15);
    EXPECT_NEAR(q.value, 1.0 / (deg + 1), 1e-15) << deg;
  }
}

TEST(Quadrature, NonIntegrableSingularityRejected) {
  EXPECT_THROW(integrate_finite([](double t) { return 1 / t; }, 0, 1, 1e-8), NumericalError);
}

TEST(TailClassifier, Examples) {
  const auto v1 = classify_tail_integral([](double t) { return 1 / (t * t); }, 1, 1e-8);
  ASSERT_TRUE(is_convergent(v1)) << describe(v1);
  EXPECT_NEAR(std::get<Convergent>(v1).value, 1.0, 1e-7);

  const auto v2 = classify_tail_integral([](double t) { return 1 / t; }, 1, 1e-8);
  ASSERT_TRUE(is_divergent(v2)) << describe(v2);
  EXPECT_NEAR(std::get<Divergent>(v2).growth_exponent, -1.0, 0.05);

  // (2F)^(-1/2) with F = t^4/4
  const auto v3 = classify_tail_integral([](double t) { return std::sqrt(2.0) / (t * t); }, 1, 1e-8);
  ASSERT_TRUE(is_convergent(v3));
  EXPECT_NEAR(std::get<Convergent>(v3).value, std::sqrt(2.0), 1e-7);
}

TEST(TailClassifier, PowerFamily) {
  for (double s : {0.5, 0.9, 1.0, 1.1, 2.0}) {
    const auto v = classify_tail_integral([s](double t) { return std::pow(t, -s); }, 1, 1e-6);
    if (s <= 1.0) {
      EXPECT_TRUE(is_divergent(v) || (s == 1.0 && std::holds_alternative<Inconclusive>(v)))
          << s << " " << describe(v);
    } else {
      EXPECT_TRUE(is_convergent(v)) << s << " " << describe(v);
    }
  }
}

TEST(TailClassifier, RejectsNonPositive) {
  EXPECT_THROW(classify_tail_integral([](double t) { return 1 - t; }, 1, 1e-8), Error);
}

TEST(OriginClassifier, Examples) {
  const auto v1 = classify_origin_integral([](double t) { return 1 / std::sqrt(t); }, 1, 1e-8);
  ASSERT_TRUE(is_convergent(v1)) << describe(v1);
  EXPECT_NEAR(std::get<Convergent>(v1).value, 2.0, 1e-7);
  EXPECT_TRUE(is_divergent(classify_origin_integral([](double t) { return 1 / t; }, 1, 1e-8)));
  // (int_0^t s^(-1/2) ds)^(-1/2) = (2 sqrt t)^(-1/2)
  const auto v3 =
      classify_origin_integral([](double t) { return 1 / std::sqrt(2 * std::sqrt(t)); }, 1, 1e-8);
  ASSERT_TRUE(is_convergent(v3));
  EXPECT_NEAR(std::get<Convergent>(v3).value, std::sqrt(0.5) * 4.0 / 3.0, 1e-7);
}

TEST(OriginClassifier, PowerFamily) {
  for (double s : {0.5, 0.9, 1.0, 1.1, 2.0}) {
    const auto v = classify_origin_integral([s](double t) { return std::pow(t, -s); }, 1, 1e-6);
    if (s >= 1.0) {
      EXPECT_TRUE(is_divergent(v) || (s == 1.0 && std::holds_alternative<Inconclusive>(v)))
          << s << " " << describe(v);
    } else {
      EXPECT_TRUE(is_convergent(v)) << s << " " << describe(v);
    }
  }
}

TEST(RootFinding, Examples) {
  EXPECT_NEAR(find_root_monotone([](double t) { return t * t; }, 4, 0, 10, 1e-14), 2.0, 1e-12);
  EXPECT_NEAR(find_root_monotone([](double t) { return std::exp(t); }, 1, -1, 1, 1e-14), 0.0, 1e-12);
  // Phi(h) = sqrt(2)/h against t^2/2 at t = 0.1
  const double h = find_root_monotone([](double y) { return std::sqrt(2.0) / y; }, 0.005, 1, 2, 1e-15);
  EXPECT_NEAR(h, 200 * std::sqrt(2.0), 1e-9);
  EXPECT_THROW(find_root_monotone([](double) { return 1.0; }, 2, 0, 1, 1e-12), NumericalError);
}

TEST(Limits, AitkenRichardsonLevin) {
  // partial sums of a geometric series
  EXPECT_NEAR(aitken(1.0, 1.5, 1.75), 2.0, 1e-15);
  std::vector<double> v;
  for (int k = 0; k < 5; ++k) {
    const double h = std::pow(0.5, k);
    v.push_back(3.0 + 2.0 * h + 0.5 * h * h);
  }
  EXPECT_NEAR(richardson(v, 0.5, 1.0).value, 3.0, 1e-12);
  std::vector<double> s;
  double sum = 0.0;
  for (int k = 1; k <= 14; ++k) {
    sum += (k % 2 ? 1.0 : -1.0) / k;
    s.push_back(sum);
  }
  EXPECT_NEAR(levin_u(s).value, std::log(2.0), 1e-10);
}

TEST(RadialIvp, ConstantSolution) {
  const RadialSolution s = integrate_radial_ivp([](double, double, double) { return 0.0; }, 1.0, 0.0, 3,
                                                5.0, 1e-10);
  for (double u : s.u) EXPECT_NEAR(u, 1.0, 1e-12);
  EXPECT_NEAR(s.r.back(), 5.0, 1e-12);
}

TEST(RadialIvp, EigenfunctionZero) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  RadialIvpOptions o;
  o.signed_mode = true;
  o.output_radii = {0.5, 1.0};
  const RadialSolution s =
      integrate_radial_ivp([pi2](double, double u, double) { return -pi2 * u; }, 1.0, 0.0, 3, 1.0, 1e-12, o);
  EXPECT_NEAR(s.u.back(), 0.0, 1e-8);
  EXPECT_NEAR(s.u.front(), std::sin(std::numbers::pi / 2) / (std::numbers::pi / 2), 1e-9);
}

TEST(RadialIvp, ConvergenceOrder) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  RadialIvpOptions o;
  o.signed_mode = true;
  o.output_radii = {0.9};
  const double exact = std::sin(0.9 * std::numbers::pi) / (0.9 * std::numbers::pi);
  auto err = [&](double tol) {
    const RadialSolution s =
        integrate_radial_ivp([pi2](double, double u, double) { return -pi2 * u; }, 1.0, 0.0, 3, 1.0, tol, o);
    return std::fabs(s.u.back() - exact);
  };
  const double e1 = err(1e-5), e2 = err(1e-8);
  EXPECT_LT(e1, 1e-4);
  EXPECT_LT(e2, e1);
  EXPECT_LT(e2, 1e-7);
}

namespace {

double classify_tail_value(const RealFn& f) {
  return std::get<Convergent>(classify_tail_integral(f, 1e4, 1e-10)).value;
}

}  // namespace

TEST(RadialIvp, DetectsBlowup) {
  // u'' = u^2 on N = 1 blows up in finite r
  RadialIvpOptions o;
  const RadialSolution s =
      integrate_radial_ivp([](double, double u, double) { return u * u; }, 1.0, 0.0, 1, 10.0, 1e-10, o);
  EXPECT_EQ(s.classification, Classification::BoundaryBlowup);
  ASSERT_TRUE(s.blowup_radius.has_value());
  // exact: r* = int_0^inf dw / sqrt(2 (u^3 - 1)/3) with u = 1 + w
  const auto integrand = [](double w) { return 1 / std::sqrt(2 * w * (3 + 3 * w + w * w) / 3); };
  const double rstar = integrate_finite(integrand, 0, 1e4, 1e-10).value +
                       classify_tail_value(integrand);
  // near r*, u ~ 6/(r* - r)^2, so |u'| = 12/(r* - r)^3 reaches the threshold first
  EXPECT_NEAR(*s.blowup_radius, rstar - std::cbrt(12.0 / 1e8), 1e-6);
}

TEST(Interpolation, MonotoneCubic) {
  std::vector<double> x{0, 1, 2, 3, 4}, y{0, 1, 1, 2, 8};
  MonotoneCubic m(x, y);
  for (double t = 0; t <= 4; t += 0.01) {
    const double v = m(t);
    EXPECT_GE(m.derivative(t), -1e-14);
    EXPECT_GE(v, -1e-14);
  }
  EXPECT_NEAR(m(1.5), 1.0, 1e-14);
  EXPECT_THROW(m(4.5), PreconditionError);
}

TEST(Interpolation, CumulativeIntegralIsExactForCubics) {
  const std::vector<double> x = geometric_grid(1e-3, 2.0, 8);
  std::vector<double> f;
  for (double t : x) f.push_back(t * t * t - t);
  const std::vector<double> c = cumulative_integral(x, f);
  auto F = [](double t) { return t * t * t * t / 4 - t * t / 2; };
  EXPECT_NEAR(c.back(), F(2.0) - F(1e-3), 1e-12);
}

TEST(Grid, GeometricAndSlope) {
  const std::vector<double> g = geometric_grid(1.0, 16.0, 2);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_DOUBLE_EQ(g.front(), 1.0);
  EXPECT_DOUBLE_EQ(g.back(), 16.0);
  std::vector<double> y;
  for (double t : g) y.push_back(3 * std::pow(t, -2.5));
  EXPECT_NEAR(loglog_slope(g, y), -2.5, 1e-12);
}
