#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "fishpop/errors.hpp"
#include "fishpop/expression.hpp"

using namespace fishpop;

TEST_SUITE("expression") {
  TEST_CASE("evaluation of the grammar") {
    CHECK(Expression::parse("a*l")(0.0, 2.0, 3.0) == 6.0);
    CHECK(Expression::parse("1 + 2*3 - 4/2")(0, 0, 0) == 5.0);
    CHECK(Expression::parse("-t*t")(3.0, 0, 0) == -9.0);
    CHECK(Expression::parse("8/4/2")(0, 0, 0) == 1.0);
    CHECK(Expression::parse("2 - 3 - 4")(0, 0, 0) == -5.0);
    CHECK(Expression::parse("exp(0) + cos(0) + sin(0)")(0, 0, 0) == 2.0);
    CHECK(Expression::parse("min(a, l) + max(a, l)")(0, 1.0, 4.0) == 5.0);
    CHECK(Expression::parse("indicator(l, 0, 0.5)")(0, 0, 0.5) == 1.0);
    CHECK(Expression::parse("indicator(l, 0, 0.5)")(0, 0, 0.51) == 0.0);
    CHECK(Expression::parse("pi")(0, 0, 0) == doctest::Approx(M_PI));
    CHECK(Expression::parse("1e-3*2")(0, 0, 0) == doctest::Approx(2e-3));
  }

  TEST_CASE("evaluation is bit-reproducible") {
    const auto e = Expression::parse("exp(-0.3*a)*sin(pi*l)/(1 + t)");
    const double x = e(0.3, 1.7, 0.41);
    for (int k = 0; k < 10; ++k) CHECK(e(0.3, 1.7, 0.41) == x);
  }

  TEST_CASE("malformed expressions are parse errors") {
    CHECK_THROWS_AS(Expression::parse("1 +"), ParseError);
    CHECK_THROWS_AS(Expression::parse("foo(l)"), ParseError);
    CHECK_THROWS_AS(Expression::parse("x + 1"), ParseError);
    CHECK_THROWS_AS(Expression::parse("(a"), ParseError);
    CHECK_THROWS_AS(Expression::parse("min(a)"), ParseError);
    CHECK_THROWS_AS(Expression::parse(""), ParseError);
    CHECK_THROWS_AS(Expression::parse("1 2"), ParseError);
    CHECK_THROWS_AS(Expression::parse("l^2"), ParseError);
  }

  TEST_CASE("printing round-trips") {
    for (const char* text : {"a*l", "-(a - l)", "a - (l - t)", "a/(l*t)", "exp(-0.5*a)*(1 + cos(pi*l))",
                             "2*-1", "(-2)*2", "-(2*2)", "min(a, 1e-300) + 0.1", "indicator(l, 0, 0.2)*t"}) {
      CAPTURE(text);
      const auto e = Expression::parse(text);
      const auto again = Expression::parse(e.to_string());
      CHECK(again.to_string() == e.to_string());
      for (double x : {0.1, 0.7, 1.3}) CHECK(again(x, x + 0.2, x / 2) == e(x, x + 0.2, x / 2));
    }
  }

  TEST_CASE("symbolic derivatives match finite differences") {
    const auto e = Expression::parse("exp(-t)*(1 + cos(pi*l))*(2 + sin(a*l)) / (1 + a*a) - l*l*l");
    const double t = 0.3, a = 0.7, l = 0.45, h = 1e-6;
    CHECK(e.derivative(Variable::t)(t, a, l) == doctest::Approx((e(t + h, a, l) - e(t - h, a, l)) / (2 * h)).epsilon(1e-7));
    CHECK(e.derivative(Variable::a)(t, a, l) == doctest::Approx((e(t, a + h, l) - e(t, a - h, l)) / (2 * h)).epsilon(1e-7));
    CHECK(e.derivative(Variable::l)(t, a, l) == doctest::Approx((e(t, a, l + h) - e(t, a, l - h)) / (2 * h)).epsilon(1e-7));
    CHECK(Expression::parse("a*l").derivative(Variable::t).is_constant());
    CHECK(Expression::parse("min(a, 1)").derivative(Variable::l).constant_value() == 0.0);
    CHECK_THROWS_AS(Expression::parse("min(l, 1)").derivative(Variable::l), NumericalError);
    CHECK_THROWS_AS(Expression::parse("indicator(l, 0, 1)").derivative(Variable::l), NumericalError);
  }

  TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    for (double x : {1.0 / 3.0, 6.02214076e23, -1e-310, 123456789.125}) CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}
