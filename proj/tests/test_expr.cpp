#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hardylab/errors.hpp"
#include "hardylab/expr.hpp"

using namespace hardylab;
using forms::CoefficientExpr;
using forms::EvalContext;

namespace {

EvalContext at_d(double d) {
  EvalContext c;
  c.d = d;
  return c;
}

std::size_t parse_offset(const std::string& text) {
  try {
    (void)CoefficientExpr::parse(text);
  } catch (const ParseError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "no parse error for '" << text << "'";
  return std::string::npos;
}

} // namespace

TEST(Expr, PowerStructure) {
  auto e = CoefficientExpr::parse("d^-1.5");
  EXPECT_EQ(e.structure(), "(^ d -1.5)");
  EXPECT_NEAR(e.eval(at_d(0.25)), 8.0, 1e-14);
  EXPECT_TRUE(e.depends_on_distance());
}

TEST(Expr, SumStructure) {
  auto e = CoefficientExpr::parse("-0.125*d^-2 + 5");
  EXPECT_EQ(e.structure(), "(+ (* -0.125 (^ d -2)) 5)");
  EXPECT_NEAR(e.eval(at_d(0.5)), 4.5, 1e-15);
}

TEST(Expr, DoubleCaretIsRejectedAtItsOffset) {
  EXPECT_EQ(parse_offset("d^^2"), 2u);
  try {
    (void)CoefficientExpr::parse("d^^2");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(Expr, OtherErrors) {
  EXPECT_EQ(parse_offset("1 +"), 3u);
  EXPECT_EQ(parse_offset("foo"), 0u);
  EXPECT_EQ(parse_offset("(d"), 2u);
  EXPECT_EQ(parse_offset("d 2"), 2u);
  EXPECT_EQ(parse_offset(""), 0u);
}

TEST(Expr, Precedence) {
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("-d^2").eval(at_d(3)), -9.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("2*d^2").eval(at_d(3)), 18.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("1 - 2 - 3").eval(at_d(0)), -4.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("8 / 4 / 2").eval(at_d(0)), 1.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("(1 + d) * 2").eval(at_d(1)), 4.0);
}

TEST(Expr, SymbolsAndFunctions) {
  EvalContext c;
  c.x1 = 1.5;
  c.x2 = -2;
  c.x3 = 0.5;
  c.r = 4;
  c.z = 7;
  c.d = 0.1;
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("x + y + x3").eval(c), 0.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("x1*x2").eval(c), -3.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("r^2 + z").eval(c), 23.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("min(r, z) + max(r, z)").eval(c), 11.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("abs(x2)").eval(c), 2.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("pos(x2) + neg(x2)").eval(c), 2.0);
  EXPECT_DOUBLE_EQ(CoefficientExpr::parse("pi").eval(c), std::numbers::pi);
}

TEST(Expr, ConstantDetection) {
  EXPECT_TRUE(CoefficientExpr::parse("2*3 + 1").is_constant());
  EXPECT_FALSE(CoefficientExpr::parse("2*d").is_constant());
  EXPECT_FALSE(CoefficientExpr::parse("x1").depends_on_distance());
  EXPECT_TRUE(CoefficientExpr().is_constant());
  EXPECT_DOUBLE_EQ(CoefficientExpr().eval(at_d(1)), 0.0);
}

TEST(Expr, PositiveNegativeSplit) {
  auto q = CoefficientExpr::parse("0.3*d^-2 - 1/d + x1");
  auto pos = q.positive_part(), neg = q.negative_part();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 2.0), v(-3, 3);
  for (int i = 0; i < 200; ++i) {
    EvalContext c;
    c.d = u(rng);
    c.x1 = v(rng);
    double value = q.eval(c);
    EXPECT_GE(pos.eval(c), 0.0);
    EXPECT_GE(neg.eval(c), 0.0);
    EXPECT_NEAR(pos.eval(c) - neg.eval(c), value, 1e-12 * std::max(1.0, std::abs(value)));
  }
}

TEST(Expr, Builders) {
  auto p = CoefficientExpr::distance_power(0.5);
  EXPECT_DOUBLE_EQ(p.eval(at_d(0.25)), 0.5);
  EXPECT_DOUBLE_EQ(p.scaled(-4).eval(at_d(0.25)), -2.0);
  auto sum = p + CoefficientExpr::constant(1);
  EXPECT_DOUBLE_EQ(sum.eval(at_d(0.25)), 1.5);
  auto prod = p * CoefficientExpr::constant(3);
  EXPECT_DOUBLE_EQ(prod.eval(at_d(0.25)), 1.5);
  EXPECT_EQ(CoefficientExpr::parse("  d ^ 2 ").source(), "  d ^ 2 ");
}
