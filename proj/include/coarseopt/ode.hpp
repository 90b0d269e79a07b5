#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "coarseopt/state.hpp"

namespace coarseopt {

struct OdeOptions {
  double abs_tol{1e-10};
  double rel_tol{1e-8};
  double max_step{std::numeric_limits<double>::infinity()};
  std::size_t max_steps{50'000'000};
};

class OdeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double dp_a2[1] = {1.0 / 5};
constexpr double dp_a3[2] = {3.0 / 40, 9.0 / 40};
constexpr double dp_a4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
constexpr double dp_a5[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561,
                             -212.0 / 729};
constexpr double dp_a6[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247,
                             49.0 / 176, -5103.0 / 18656};
constexpr double dp_b5[6] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                             -2187.0 / 6784, 11.0 / 84};
constexpr double dp_b4[7] = {5179.0 / 57600, 0.0,          7571.0 / 16695,
                             393.0 / 640,    -92097.0 / 339200,
                             187.0 / 2100,   1.0 / 40};

}  // namespace detail

/// Adaptive Dormand-Prince 5(4). The observer is called after each accepted
/// step as obs(t, x); returning false stops the integration early and the
/// current state is returned. Throws OdeFailure on step-size underflow.
template <class Rhs, class Obs>
CoarseState rk45_observed(Rhs&& f, CoarseState x, double t0, double t1,
                          const OdeOptions& opt, Obs&& obs) {
  using detail::dp_a2;
  using detail::dp_a3;
  using detail::dp_a4;
  using detail::dp_a5;
  using detail::dp_a6;
  using detail::dp_b4;
  using detail::dp_b5;
  using detail::dp_c;

  if (!(t1 >= t0)) throw std::invalid_argument("rk45: t1 < t0");
  if (t1 == t0) return x;

  const std::size_t n = x.dim();
  double t = t0;
  double h = std::min(t1 - t0, opt.max_step);
  CoarseState k[7];
  k[0] = f(t, x);  // FSAL slot

  for (std::size_t step = 0; step < opt.max_steps; ++step) {
    h = std::min(h, t1 - t);
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0))
      throw OdeFailure("rk45: step size underflow");

    auto stage = [&](const double* a, int m) {
      CoarseState y = x;
      for (int j = 0; j < m; ++j) y += (h * a[j]) * k[j];
      return y;
    };
    k[1] = f(t + dp_c[1] * h, stage(dp_a2, 1));
    k[2] = f(t + dp_c[2] * h, stage(dp_a3, 2));
    k[3] = f(t + dp_c[3] * h, stage(dp_a4, 3));
    k[4] = f(t + dp_c[4] * h, stage(dp_a5, 4));
    k[5] = f(t + dp_c[5] * h, stage(dp_a6, 5));

    CoarseState x5 = x;
    for (int j = 0; j < 6; ++j) x5 += (h * dp_b5[j]) * k[j];
    k[6] = f(t + h, x5);

    CoarseState x4 = x;
    for (int j = 0; j < 7; ++j) x4 += (h * dp_b4[j]) * k[j];

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double scale =
          opt.abs_tol + opt.rel_tol * std::max(std::abs(x[i]), std::abs(x5[i]));
      err = std::max(err, std::abs(x5[i] - x4[i]) / scale);
    }

    if (err <= 1.0) {
      t += h;
      x = x5;
      k[0] = k[6];  // FSAL
      if (!obs(t, x)) return x;
      if (t >= t1) return x;
      const double grow = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
      h = std::min(h * std::clamp(grow, 0.2, 5.0), opt.max_step);
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9);
    }
  }
  throw OdeFailure("rk45: max step count exceeded");
}

template <class Rhs>
CoarseState rk45(Rhs&& f, CoarseState x, double t0, double t1,
                 const OdeOptions& opt = {}) {
  return rk45_observed(std::forward<Rhs>(f), x, t0, t1, opt,
                       [](double, const CoarseState&) { return true; });
}

}  // namespace coarseopt
