#include "mvact/spline.hpp"

#include <cmath>

#include "mvact/common.hpp"

namespace mvact::interp {

NaturalCubicSpline::NaturalCubicSpline(const std::vector<double>& x,
                                       const std::vector<double>& y)
    : x_(x), y_(y) {
  const std::size_t n = x.size();
  if (n < 2) fail(ErrorKind::degenerate, "spline: need at least 2 knots");
  if (y.size() != n) fail(ErrorKind::validation, "spline: knot arrays differ in length");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(x[i + 1] > x[i])) {
      if (x[i + 1] == x[i])
        fail(ErrorKind::degenerate, "spline: duplicate knot position at index " +
                                        std::to_string(i));
      fail(ErrorKind::validation, "spline: knot positions not increasing");
    }
  }
  for (double v : y)
    if (!std::isfinite(v)) fail(ErrorKind::numeric, "spline: non-finite knot value");

  // Tridiagonal system for interior second derivatives (Thomas algorithm);
  // natural boundary: m[0] = m[n-1] = 0.
  m_.assign(n, 0.0);
  if (n == 2) return;
  const std::size_t k = n - 2;
  std::vector<double> diag(k), rhs(k), upper(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double h0 = x[i + 1] - x[i];
    const double h1 = x[i + 2] - x[i + 1];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = x[i + 1] - x[i];  // h_i, sub-diagonal entry
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i >= 1; --i)
    m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
}

double NaturalCubicSpline::eval(double q) const {
  const std::size_t n = x_.size();
  if (q < x_.front() || q > x_.back())
    fail(ErrorKind::range, "spline: query " + format_double(q) +
                               " outside [" + format_double(x_.front()) + ", " +
                               format_double(x_.back()) + "]");
  // rightmost interval with x_[i] <= q
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (x_[mid] <= q)
      lo = mid;
    else
      hi = mid;
  }
  const double h = x_[lo + 1] - x_[lo];
  const double a = (x_[lo + 1] - q) / h;
  const double b = (q - x_[lo]) / h;
  return a * y_[lo] + b * y_[lo + 1] +
         ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[lo + 1]) * h * h / 6.0;
}

std::vector<double> NaturalCubicSpline::eval(const std::vector<double>& qs) const {
  std::vector<double> out;
  out.reserve(qs.size());
  for (double q : qs) out.push_back(eval(q));
  return out;
}

std::vector<double> spline_interpolate(const std::vector<double>& knot_x,
                                       const std::vector<double>& knot_y,
                                       const std::vector<double>& queries) {
  return NaturalCubicSpline(knot_x, knot_y).eval(queries);
}

}  // namespace mvact::interp
