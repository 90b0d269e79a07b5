#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "coarseopt/mechanisms.hpp"
#include "coarseopt/ode.hpp"
#include "coarseopt/state.hpp"

namespace coarseopt {

enum class Stability { stable, unstable, saddle, marginal };

inline std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::saddle: return "saddle";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

struct SteadyState {
  CoarseState state;
  Stability stability{Stability::marginal};
  std::array<double, 2> eig_real{};  // real parts of the Jacobian spectrum
  std::size_t n_eig{0};
};

class NoSaddleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

constexpr double kMarginalTol = 1e-8;

inline Stability classify(const double* re, std::size_t n, bool real_pair,
                          double det) {
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(re[i]) <= kMarginalTol) return Stability::marginal;
  if (n == 2 && real_pair && det < 0.0) return Stability::saddle;
  bool all_neg = true;
  for (std::size_t i = 0; i < n; ++i) all_neg = all_neg && re[i] < 0.0;
  return all_neg ? Stability::stable : Stability::unstable;
}

inline SteadyState make_steady_no(double theta, const NOParams& p) {
  SteadyState s;
  s.state = CoarseState(theta);
  s.n_eig = 1;
  s.eig_real[0] = jacobian_no(theta, p);
  s.stability = classify(s.eig_real.data(), 1, true, 0.0);
  return s;
}

inline SteadyState make_steady_co(const CoarseState& x, const COParams& p) {
  SteadyState s;
  s.state = x;
  s.n_eig = 2;
  const Jacobian2 J = jacobian_co(x, p);
  const double tr = J.trace(), det = J.det();
  const double disc = tr * tr - 4.0 * det;
  bool real_pair = disc >= 0.0;
  if (real_pair) {
    const double sq = std::sqrt(disc);
    s.eig_real = {0.5 * (tr - sq), 0.5 * (tr + sq)};
  } else {
    s.eig_real = {0.5 * tr, 0.5 * tr};
  }
  s.stability = classify(s.eig_real.data(), 2, real_pair, det);
  return s;
}

// Real roots of the monic depressed form; trigonometric branch for the
// three-root case, Cardano otherwise. Roots polished by Newton on rhs_no.
inline std::vector<double> no_cubic_roots(const NOParams& p) {
  std::vector<double> roots;
  if (p.k == 0.0) {
    const double denom = p.alpha + p.gamma;
    if (denom <= 0.0) return roots;  // rhs identically ~0; no isolated root
    roots.push_back(p.alpha / denom);
    return roots;
  }
  // k t^3 - 2k t^2 + (k+alpha+gamma) t - alpha = 0, normalized monic
  const double q = (p.k + p.alpha + p.gamma) / p.k;
  const double r = -p.alpha / p.k;
  // t = y + 2/3
  const double P = q - 4.0 / 3.0;
  const double Q = -16.0 / 27.0 + 2.0 * q / 3.0 + r;
  const double disc = 0.25 * Q * Q + P * P * P / 27.0;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double y = std::cbrt(-0.5 * Q + sq) + std::cbrt(-0.5 * Q - sq);
    roots.push_back(y + 2.0 / 3.0);
  } else {
    const double m = 2.0 * std::sqrt(-P / 3.0);
    const double arg = std::clamp(3.0 * Q / (P * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int j = 0; j < 3; ++j)
      roots.push_back(m * std::cos(phi - 2.0 * M_PI * j / 3.0) + 2.0 / 3.0);
  }
  // Newton polish; keep roots inside [0,1].
  std::vector<double> out;
  for (double t : roots) {
    for (int it = 0; it < 60; ++it) {
      const double f = rhs_no_raw(t, p);
      const double d = jacobian_no(t, p);
      if (d == 0.0) break;
      const double step = f / d;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    if (t >= -1e-9 && t <= 1.0 + 1e-9 && std::abs(rhs_no_raw(t, p)) < 1e-10)
      out.push_back(std::clamp(t, 0.0, 1.0));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-8; }),
            out.end());
  return out;
}

// Newton with analytic Jacobian seeded from a 21x21 grid over the simplex;
// found roots deduplicated. Only interior equilibria are reported: the
// vacancy-frozen corner (theta_A, theta_B) = (0, 1) solves the equations for
// every beta but is a degenerate absorbing point, not a kinetic branch.
inline std::vector<CoarseState> co_roots(const COParams& p) {
  std::vector<CoarseState> out;
  constexpr double kInterior = 1e-7;
  constexpr int kGrid = 21;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid - i; ++j) {
      CoarseState x(i / double(kGrid - 1), j / double(kGrid - 1));
      bool converged = false;
      for (int it = 0; it < 100; ++it) {
        const CoarseState F = rhs_co_raw(x, p);
        const Jacobian2 J = jacobian_co(x, p);
        const double det = J.det();
        if (std::abs(det) < 1e-14) break;
        const double dx = (F[0] * J.a11 - F[1] * J.a01) / det;
        const double dy = (F[1] * J.a00 - F[0] * J.a10) / det;
        x[0] -= dx;
        x[1] -= dy;
        if (std::sqrt(dx * dx + dy * dy) < 1e-12) {
          converged = true;
          break;
        }
        if (std::abs(x[0]) > 10.0 || std::abs(x[1]) > 10.0) break;  // diverged
      }
      if (!converged) continue;
      if (x[0] < kInterior || x[1] < kInterior ||
          1.0 - x[0] - x[1] < kInterior)
        continue;
      if (norm2(rhs_co_raw(x, p)) >= 1e-10) continue;
      bool dup = false;
      for (const auto& y : out)
        dup = dup || (std::abs(x[0] - y[0]) < 1e-8 && std::abs(x[1] - y[1]) < 1e-8);
      if (!dup) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const CoarseState& a, const CoarseState& b) { return a[0] < b[0]; });
  return out;
}

}  // namespace detail

/// All steady states of the mean-field model, sorted by the first coverage
/// component, with stability from the Jacobian spectrum.
inline std::vector<SteadyState> find_steady_states(const MechanismParams& p) {
  require_rates(p);
  std::vector<SteadyState> out;
  if (const auto* q = std::get_if<NOParams>(&p)) {
    for (double t : detail::no_cubic_roots(*q))
      out.push_back(detail::make_steady_no(t, *q));
  } else {
    const auto& c = std::get<COParams>(p);
    for (const auto& x : detail::co_roots(c))
      out.push_back(detail::make_steady_co(x, c));
  }
  return out;
}

struct ScanRow {
  double param;
  std::vector<SteadyState> states;
};

/// Steady states swept over one named parameter. resolution points including
/// both endpoints; a single-point scan requires lo == hi.
inline std::vector<ScanRow> bifurcation_scan(const MechanismParams& base,
                                             std::string_view param_name,
                                             double lo, double hi,
                                             std::size_t resolution) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || hi < lo || resolution < 1)
    throw std::invalid_argument("bifurcation_scan: bad range");
  if (resolution == 1 && lo != hi)
    throw std::invalid_argument("bifurcation_scan: single-point scan needs lo == hi");
  std::vector<ScanRow> rows;
  rows.reserve(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    const double v = resolution == 1
                         ? lo
                         : lo + (hi - lo) * double(i) / double(resolution - 1);
    rows.push_back({v, find_steady_states(with_named_param(base, param_name, v))});
  }
  return rows;
}

/// Final state after integrating the mean-field model for t_span.
inline CoarseState integrate(const MechanismParams& p, const CoarseState& x0,
                             double t_span, const OdeOptions& opt = {}) {
  if (state_dim(p) != x0.dim())
    throw std::domain_error("integrate: state dimension mismatch");
  require_coverages(x0, 1e-9);
  if (t_span < 0) throw std::invalid_argument("integrate: negative t_span");
  if (t_span == 0) return x0;
  return rk45([&p](double, const CoarseState& x) { return rhs_raw(p, x); }, x0,
              0.0, t_span, opt);
}

/// Trajectory sampled at multiples of dt (plus t=0 and t_end).
inline std::vector<std::pair<double, CoarseState>> integrate_sampled(
    const MechanismParams& p, const CoarseState& x0, double t_end, double dt,
    const OdeOptions& opt = {}) {
  if (dt <= 0) throw std::invalid_argument("integrate_sampled: dt must be > 0");
  std::vector<std::pair<double, CoarseState>> out;
  out.emplace_back(0.0, x0);
  CoarseState x = x0;
  double t = 0.0;
  for (std::size_t k = 1; t < t_end; ++k) {
    const double tn = std::min(k * dt, t_end);
    x = rk45([&p](double, const CoarseState& y) { return rhs_raw(p, y); }, x, t,
             tn, opt);
    out.emplace_back(tn, x);
    t = tn;
  }
  return out;
}

/// Saddle point data for the 2-D model: eigenvalues and unit eigenvectors.
struct SaddleFrame {
  CoarseState saddle;
  double lambda_stable{};
  double lambda_unstable{};
  std::array<double, 2> v_stable{};
  std::array<double, 2> v_unstable{};
};

inline SaddleFrame saddle_frame(const COParams& p) {
  const auto states = find_steady_states(MechanismParams{p});
  const SteadyState* sd = nullptr;
  for (const auto& s : states)
    if (s.stability == Stability::saddle) sd = &s;
  if (!sd)
    throw NoSaddleError("no saddle steady state at these parameters");
  const Jacobian2 J = jacobian_co(sd->state, p);
  const double tr = J.trace(), det = J.det();
  const double sq = std::sqrt(tr * tr - 4.0 * det);
  SaddleFrame f;
  f.saddle = sd->state;
  f.lambda_stable = 0.5 * (tr - sq);
  f.lambda_unstable = 0.5 * (tr + sq);
  auto eigvec = [&](double lam) -> std::array<double, 2> {
    // v orthogonal to the larger row of (J - lam I)
    const double r1[2] = {J.a00 - lam, J.a01};
    const double r2[2] = {J.a10, J.a11 - lam};
    const double n1 = std::hypot(r1[0], r1[1]);
    const double n2 = std::hypot(r2[0], r2[1]);
    std::array<double, 2> v{};
    if (n1 >= n2) {
      v = {r1[1], -r1[0]};
    } else {
      v = {r2[1], -r2[0]};
    }
    const double n = std::hypot(v[0], v[1]);
    return {v[0] / n, v[1] / n};
  };
  f.v_stable = eigvec(f.lambda_stable);
  f.v_unstable = eigvec(f.lambda_unstable);
  return f;
}

struct Separatrix {
  std::vector<CoarseState> polyline;  // ordered through the saddle
  CoarseState saddle;
  std::size_t saddle_index{0};
};

/// Stable manifold of the saddle, traced by integrating the time-reversed
/// field from saddle +- delta along the unit stable eigenvector until the
/// polyline leaves the unit simplex or its arc length exceeds 10.
inline Separatrix trace_separatrix(const COParams& p) {
  const SaddleFrame f = saddle_frame(p);
  if (std::abs(f.lambda_stable) <= detail::kMarginalTol ||
      std::abs(f.lambda_unstable) <= detail::kMarginalTol)
    throw NoSaddleError("marginal eigenvalue at saddle; separatrix undefined");

  constexpr double kDelta = 1e-6;
  constexpr double kMaxArc = 10.0;
  constexpr double kSegLen = 0.004;
  const double bound_tol = 1e-6;

  auto inside = [&](const CoarseState& x) {
    return x[0] >= -bound_tol && x[1] >= -bound_tol &&
           x.sum() <= 1.0 + bound_tol && x[0] <= 1.0 + bound_tol &&
           x[1] <= 1.0 + bound_tol;
  };
  auto reversed = [&p](double, const CoarseState& x) {
    return -1.0 * rhs_co_raw(x, p);
  };

  // Near the saddle the reversed flow expands at rate |lambda_stable|, so a
  // leg is capped where the displacement roughly doubles; away from it the
  // leg targets a fixed polyline segment length.
  const double t_double = std::log(2.0) / std::abs(f.lambda_stable);
  auto branch = [&](double sgn) {
    std::vector<CoarseState> pts;
    CoarseState x = f.saddle;
    x[0] += sgn * kDelta * f.v_stable[0];
    x[1] += sgn * kDelta * f.v_stable[1];
    double arc = kDelta;
    OdeOptions opt;
    for (std::size_t it = 0; it < 200000 && arc <= kMaxArc && inside(x); ++it) {
      pts.push_back(x);
      const double speed = std::max(norm2(rhs_co_raw(x, p)), 1e-12);
      const double dt = std::min(kSegLen / speed, t_double);
      const CoarseState xn = rk45(reversed, x, 0.0, dt, opt);
      arc += norm2(xn - x);
      x = xn;
    }
    pts.push_back(x);  // first point outside (or cap hit)
    return pts;
  };

  const auto minus = branch(-1.0);
  const auto plus = branch(+1.0);

  Separatrix sep;
  sep.saddle = f.saddle;
  sep.polyline.assign(minus.rbegin(), minus.rend());
  sep.saddle_index = sep.polyline.size();
  sep.polyline.push_back(f.saddle);
  sep.polyline.insert(sep.polyline.end(), plus.begin(), plus.end());
  return sep;
}

/// Signed side of x relative to the polyline (sign of the cross product
/// against the nearest segment). Used to classify basin membership.
inline double separatrix_side(const Separatrix& sep, const CoarseState& x) {
  double best_d2 = std::numeric_limits<double>::infinity();
  double side = 0.0;
  for (std::size_t i = 0; i + 1 < sep.polyline.size(); ++i) {
    const CoarseState& a = sep.polyline[i];
    const CoarseState& b = sep.polyline[i + 1];
    const double ex = b[0] - a[0], ey = b[1] - a[1];
    const double px = x[0] - a[0], py = x[1] - a[1];
    const double e2 = ex * ex + ey * ey;
    const double t = e2 > 0 ? std::clamp((px * ex + py * ey) / e2, 0.0, 1.0) : 0.0;
    const double dx = px - t * ex, dy = py - t * ey;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      side = ex * py - ey * px;
    }
  }
  return side;
}

}  // namespace coarseopt
