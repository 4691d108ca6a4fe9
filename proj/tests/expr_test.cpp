#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sellab/error.hpp"
#include "sellab/expr.hpp"

using namespace sellab;
using namespace sellab::expr;

namespace {

double at(const std::string& src, double t) { return evaluate(parse(src), t); }

}  // namespace

TEST(ExprParse, Precedence) {
  EXPECT_DOUBLE_EQ(at("1+2*t^2", 3.0), 19.0);
  EXPECT_DOUBLE_EQ(at("-t^2", 3.0), -9.0);
  EXPECT_DOUBLE_EQ(at("2^3^2", 0.0), 512.0);
  EXPECT_DOUBLE_EQ(at("(1+t)/(2*t)", 1.0), 1.0);
  EXPECT_DOUBLE_EQ(at("8-3-2", 0.0), 3.0);
  EXPECT_DOUBLE_EQ(at("8/4/2", 0.0), 1.0);
}

TEST(ExprParse, Functions) {
  EXPECT_NEAR(at("exp(ln(t))", 2.5), 2.5, 1e-15);
  EXPECT_NEAR(at("sqrt(t)*sqrt(t)", 7.0), 7.0, 1e-14);
  EXPECT_DOUBLE_EQ(at("abs(t)", -3.0), 3.0);
  EXPECT_NEAR(at("atan(1)", 0.0), M_PI / 4, 1e-15);
  EXPECT_NEAR(at("sin(t)^2+cos(t)^2", 0.7), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(at("1.5e2", 0.0), 150.0);
}

TEST(ExprParse, ErrorsCarryOffset) {
  try {
    parse("t^^2");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("(t+1"), ParseError);
  EXPECT_THROW(parse("x+1"), ParseError);
  EXPECT_THROW(parse("foo(t)"), ParseError);
  EXPECT_THROW(parse("t 2"), ParseError);
}

TEST(ExprEvaluate, DomainErrors) {
  EXPECT_THROW(at("ln(t)", -1.0), DomainError);
  EXPECT_THROW(at("sqrt(t)", -1.0), DomainError);
  EXPECT_THROW(at("1/t", 0.0), DomainError);
  EXPECT_THROW(at("t^0.5", -2.0), DomainError);
  EXPECT_DOUBLE_EQ(at("t^2", -2.0), 4.0);
}

TEST(ExprDifferentiate, Examples) {
  EXPECT_TRUE(structurally_equal(differentiate(parse("t^3")), parse("3*t^2")))
      << to_string(differentiate(parse("t^3")));
  EXPECT_TRUE(structurally_equal(differentiate(parse("exp(t)-1")), parse("exp(t)")))
      << to_string(differentiate(parse("exp(t)-1")));
  const Expr d = differentiate(parse("t*ln(t+1)"));
  for (double t : {1.0, 2.0, 5.0}) {
    EXPECT_NEAR(evaluate(d, t), std::log(t + 1) + t / (t + 1), 1e-14);
  }
}

TEST(ExprDifferentiate, AbsIsSignAndUndefinedAtZero) {
  const Expr d = differentiate(parse("abs(t)"));
  EXPECT_DOUBLE_EQ(evaluate(d, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(evaluate(d, -2.0), -1.0);
  EXPECT_THROW(evaluate(d, 0.0), DomainError);
}

TEST(ExprBuilders, FoldingIdentities) {
  const Expr t = variable();
  EXPECT_TRUE(structurally_equal(add(t, constant(0)), t));
  EXPECT_TRUE(structurally_equal(sub(t, constant(0)), t));
  EXPECT_TRUE(is_constant(mul(t, constant(0)), 0.0));
  EXPECT_TRUE(structurally_equal(mul(constant(1), t), t));
  EXPECT_FALSE(structurally_equal(add(constant(1), constant(1)), constant(2)));
}

TEST(ExprSubstitute, ReplacesVariable) {
  const Expr e = substitute(parse("t^2+1"), parse("ln(t)"));
  EXPECT_NEAR(evaluate(e, std::exp(3.0)), 10.0, 1e-13);
}

TEST(ExprLogExpand, EvaluatesUnderflowingFunctions) {
  const Expr k = parse("exp(-1/t)");
  const Expr lnk = log_expand(k);
  EXPECT_NEAR(evaluate(lnk, 1e-4), -1e4, 1e-9);
  EXPECT_EQ(evaluate(k, 1e-4), 0.0);
}

TEST(ExprTape, MatchesTreeEvaluation) {
  const ScalarFn f = ScalarFn::parse("t*exp(-t)+sqrt(1+t^2)/atan(t+1)");
  for (double t : {0.1, 1.0, 3.3, 17.0}) {
    EXPECT_DOUBLE_EQ(f(t), evaluate(f.body(), t));
  }
  EXPECT_NEAR(f.derivative()(1.0), evaluate(differentiate(f.body()), 1.0), 1e-15);
}

// Random ASTs of depth at most `depth` over operations that are smooth on
// [0.5, 2].
Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_real_distribution<double> c(0.25, 2.0);
  static constexpr int kMinDepth[] = {1, 1, 2, 2, 2, 4, 4, 3, 4, 2, 4};
  int choice;
  do {
    choice = std::uniform_int_distribution<int>(0, 10)(rng);
  } while (kMinDepth[choice] > depth);
  auto sub = [&](int d) { return random_expr(rng, d); };
  switch (choice) {
    case 0: return constant(std::round(c(rng) * 4) / 4);
    case 1: return variable();
    case 2: return make_binary(Op::Add, sub(depth - 1), sub(depth - 1));
    case 3: return make_binary(Op::Sub, sub(depth - 1), sub(depth - 1));
    case 4: return make_binary(Op::Mul, sub(depth - 1), sub(depth - 1));
    case 5:
      return make_binary(Op::Div, sub(depth - 1),
                         make_binary(Op::Add, constant(2.0), make_unary(Op::Sin, sub(depth - 3))));
    case 6:
      return make_binary(Op::Pow, make_binary(Op::Add, constant(1.0), make_unary(Op::Abs, variable())),
                         constant(std::round(c(rng) * 4) / 4));
    case 7: return make_unary(Op::Exp, make_unary(Op::Sin, sub(depth - 2)));
    case 8:
      return make_unary(Op::Ln, make_binary(Op::Add, constant(2.0), make_unary(Op::Cos, sub(depth - 3))));
    case 9: return make_unary(Op::Atan, sub(depth - 1));
    default:
      return make_unary(Op::Sqrt, make_binary(Op::Add, constant(1.0),
                                              make_binary(Op::Mul, sub(depth - 3), sub(depth - 3))));
  }
}

TEST(ExprProperty, DerivativeMatchesCentredDifference) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> point(0.5, 2.0);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const Expr e = random_expr(rng, 6);
    ASSERT_LE(depth(e), 6u);
    const Expr d = differentiate(e);
    const double t = point(rng);
    const double h = 1e-5;
    double fd, exact;
    try {
      fd = (evaluate(e, t + h) - evaluate(e, t - h)) / (2 * h);
      exact = evaluate(d, t);
    } catch (const DomainError&) {
      continue;
    }
    if (!std::isfinite(fd) || std::fabs(fd) > 1e6) continue;
    EXPECT_LE(std::fabs(exact - fd), 1e-6 * (1 + std::fabs(fd))) << to_string(e) << " at t=" << t;
    ++checked;
  }
  EXPECT_GE(checked, 950);
}

TEST(ExprProperty, PrintParseIdempotent) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Expr e = random_expr(rng, 6);
    const std::string s = to_string(e);
    const Expr back = parse(s);
    EXPECT_TRUE(structurally_equal(e, back)) << s;
    EXPECT_EQ(to_string(back), s);
  }
  for (const char* src : {"-t^2", "2^3^2", "t-(1-t)", "1/(2/t)", "-(-t)", "exp(-t)*t^(-1/2)"}) {
    const Expr e = parse(src);
    EXPECT_TRUE(structurally_equal(parse(to_string(e)), e)) << src;
  }
}
