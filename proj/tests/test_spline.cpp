#include "doctest.h"
#include "mvact/common.hpp"
#include "mvact/spline.hpp"

using mvact::Error;
using mvact::ErrorKind;
using mvact::interp::NaturalCubicSpline;
using mvact::interp::spline_interpolate;

TEST_CASE("linear data reproduced exactly") {
  // natural splines have zero curvature on linear input
  NaturalCubicSpline s({0, 1, 2}, {1, 2, 3});
  CHECK(s.eval(0.5) == doctest::Approx(1.5).epsilon(1e-12));
  for (double q = 0.0; q <= 2.0; q += 0.01)
    CHECK(std::fabs(s.eval(q) - (1.0 + q)) <= 1e-9);
}

TEST_CASE("knot reproduction") {
  std::vector<double> x{0.0, 0.7, 1.1, 2.5, 4.0};
  std::vector<double> y{0.3, -1.2, 0.9, 2.2, -0.4};
  NaturalCubicSpline s(x, y);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::fabs(s.eval(x[i]) - y[i]) <= 1e-9);
}

TEST_CASE("three-knot hat matches hand-solved system") {
  // knots (0,0),(1,1),(2,0): single interior equation
  //   h0*m0 + 2(h0+h1)*m1 + h1*m2 = 6((y2-y1)/h1 - (y1-y0)/h0)
  //   4*m1 = 6(-1 - 1) = -12  =>  m1 = -3
  // segment [0,1]: S(q) = a*y0 + b*y1 + ((a^3-a)*m0 + (b^3-b)*m1)*h^2/6
  // at q=0.5: a=b=0.5 => 0.5*1 + ((0.125-0.5)*(-3))/6 = 0.5 + 0.1875
  NaturalCubicSpline s({0, 1, 2}, {0, 1, 0});
  CHECK(s.eval(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.eval(0.5) == doctest::Approx(0.6875).epsilon(1e-12));
}

TEST_CASE("two knots degenerate to a straight segment") {
  NaturalCubicSpline s({0, 4}, {1, 9});
  CHECK(s.eval(1.0) == doctest::Approx(3.0));
  CHECK(s.eval(3.0) == doctest::Approx(7.0));
}

TEST_CASE("error paths") {
  CHECK_THROWS_AS(NaturalCubicSpline({0.0}, {1.0}), Error);
  SUBCASE("duplicate knots") {
    try {
      NaturalCubicSpline({0, 1, 1, 2}, {0, 1, 1, 2});
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate);
    }
  }
  SUBCASE("query out of range") {
    NaturalCubicSpline s({0, 1, 2}, {0, 1, 0});
    try {
      s.eval(2.5);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::range);
    }
  }
}

TEST_CASE("one-call interface") {
  auto v = spline_interpolate({0, 1, 2}, {1, 2, 3}, {0.0, 0.5, 2.0});
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(1.5));
  CHECK(v[2] == doctest::Approx(3.0));
}
