#include "doctest.h"

#include <cmath>
#include <numbers>

#include "nlfpe/expression.hpp"

using namespace nlfpe;

TEST_SUITE("expression") {

TEST_CASE("reference expressions") {
  CHECK(expression_eval("2 + sin(x)", 0.0) == 2.0);
  CHECK(expression_eval("x - x^3", 1.0) == 0.0);
  CHECK(std::abs(expression_eval("pi + arctan(x)", 0.0) - std::numbers::pi) < 1e-15);
}

TEST_CASE("precedence and associativity") {
  CHECK(expression_eval("1 + 2 * 3", 0.0) == 7.0);
  CHECK(expression_eval("2 ^ 3 ^ 2", 0.0) == 512.0);
  CHECK(expression_eval("-x^2", 3.0) == -9.0);
  CHECK(expression_eval("(1 + 2) * 3", 0.0) == 9.0);
  CHECK(expression_eval("8 / 4 / 2", 0.0) == 1.0);
  CHECK(expression_eval("2 - 3 - 4", 0.0) == -5.0);
  CHECK(expression_eval("-0.2*x", 2.0) == doctest::Approx(-0.4));
  CHECK(expression_eval("x^-1", 4.0) == 0.25);
}

TEST_CASE("functions and constants") {
  CHECK(expression_eval("exp(1)", 0.0) == doctest::Approx(std::numbers::e));
  CHECK(expression_eval("e", 0.0) == std::numbers::e);
  CHECK(expression_eval("abs(x)", -2.5) == 2.5);
  CHECK(expression_eval("atan(1)", 0.0) == doctest::Approx(std::numbers::pi / 4));
  CHECK(expression_eval("cos(x) / (2 * 1.4142135623730951)", 0.0) == doctest::Approx(0.35355339059327373));
  CHECK(expression_eval("1e-3 * x", 2.0) == doctest::Approx(2e-3));
}

TEST_CASE("parse errors carry a position") {
  try {
    Expression::parse("2 + * x");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
  CHECK_THROWS_AS(Expression::parse(""), ParseError);
  CHECK_THROWS_AS(Expression::parse("sin x"), ParseError);
  CHECK_THROWS_AS(Expression::parse("foo(x)"), ParseError);
  CHECK_THROWS_AS(Expression::parse("(x + 1"), ParseError);
  CHECK_THROWS_AS(Expression::parse("x 2"), ParseError);
}

TEST_CASE("copies share the parsed tree") {
  const auto e = Expression::parse("x * x");
  const auto f = e;
  CHECK(f(3.0) == 9.0);
  CHECK(f.source() == "x * x");
}

}
