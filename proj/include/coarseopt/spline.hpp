#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace coarseopt {

/// Natural cubic spline through (x_i, y_i); outside the knot range the
/// boundary segment's cubic is evaluated, which reproduces constant and
/// collinear data exactly.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n == 0 || n != y_.size())
      throw std::invalid_argument("spline: need matching nonempty knots");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(x_[i] < x_[i + 1]))
        throw std::invalid_argument("spline: knots must be strictly increasing");
    m_.assign(n, 0.0);
    if (n < 3) return;  // natural spline through <=2 points is linear
    // tridiagonal solve for interior second derivatives (Thomas algorithm)
    std::vector<double> diag(n - 2), rhs(n - 2), upper(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] =
          6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < n - 2; ++i) {
      const double lower = x_[i + 1] - x_[i];  // h of previous row
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i-- > 0;) {
      const double next = i + 1 < n - 2 ? m_[i + 2] : 0.0;
      m_[i + 1] = (rhs[i] - upper[i] * next) / diag[i];
    }
  }

  double operator()(double t) const {
    const std::size_t n = x_.size();
    if (n == 1) return y_[0];
    std::size_t i = 0;
    while (i + 2 < n && t > x_[i + 1]) ++i;
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - t) / h;
    const double B = 1.0 - A;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace coarseopt
