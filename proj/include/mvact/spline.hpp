#pragma once

#include <vector>

namespace mvact::interp {

// Natural cubic spline: zero second derivative at both endpoints, exact at
// knots. Knot positions must be strictly increasing; queries must stay
// inside [first, last].
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(const std::vector<double>& x, const std::vector<double>& y);

  double eval(double q) const;
  std::vector<double> eval(const std::vector<double>& qs) const;

  int knot_count() const { return static_cast<int>(x_.size()); }

 private:
  std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
};

// One-call form over (position, value) knot pairs.
std::vector<double> spline_interpolate(const std::vector<double>& knot_x,
                                       const std::vector<double>& knot_y,
                                       const std::vector<double>& queries);

}  // namespace mvact::interp
