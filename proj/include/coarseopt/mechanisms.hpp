#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "coarseopt/state.hpp"

namespace coarseopt {

/// NO reduction on Pt: Langmuir adsorption, first-order desorption, reaction
/// consuming one adsorbed NO and requiring two vacant neighbor sites.
struct NOParams {
  double alpha{1.0};   // NO adsorption rate constant
  double gamma{0.01};  // desorption rate constant
  double k{4.5};       // reaction rate constant
};

/// CO oxidation on Pt (A + 1/2 B2 -> AB): Langmuir adsorption of CO,
/// dissociative adsorption of O2, second-order surface reaction.
struct COParams {
  double alpha{1.6};   // CO adsorption rate constant
  double beta{3.5};    // O2 dissociative adsorption rate constant
  double gamma{0.04};  // CO desorption rate constant
  double k_r{1.0};     // oxidation rate constant
};

using MechanismParams = std::variant<NOParams, COParams>;

inline void require_rates(const NOParams& p) {
  if (p.alpha < 0 || p.gamma < 0 || p.k < 0)
    throw std::invalid_argument("NO rate constants must be nonnegative");
}

inline void require_rates(const COParams& p) {
  if (p.alpha < 0 || p.beta < 0 || p.gamma < 0 || p.k_r < 0)
    throw std::invalid_argument("CO rate constants must be nonnegative");
}

inline void require_rates(const MechanismParams& p) {
  std::visit([](const auto& q) { require_rates(q); }, p);
}

// --- vector fields -------------------------------------------------------

// dtheta/dt = alpha (1-theta) - gamma theta - k theta (1-theta)^2
inline double rhs_no_raw(double theta, const NOParams& p) {
  const double v = 1.0 - theta;
  return p.alpha * v - p.gamma * theta - p.k * theta * v * v;
}

inline double rhs_no(double theta, const NOParams& p, double tol = 1e-12) {
  if (!(theta >= -tol && theta <= 1.0 + tol))
    throw std::domain_error("NO coverage outside [0,1]");
  return rhs_no_raw(theta, p);
}

inline CoarseState rhs_co_raw(const CoarseState& x, const COParams& p) {
  const double a = x[0], b = x[1];
  const double v = 1.0 - a - b;
  const double rxn = 4.0 * p.k_r * a * b;
  return CoarseState(p.alpha * v - p.gamma * a - rxn,
                     2.0 * p.beta * v * v - rxn);
}

inline CoarseState rhs_co(const CoarseState& x, const COParams& p,
                          double tol = 1e-12) {
  if (x.dim() != 2) throw std::domain_error("CO state must have two components");
  require_coverages(x, tol);
  return rhs_co_raw(x, p);
}

inline CoarseState rhs_raw(const MechanismParams& p, const CoarseState& x) {
  if (std::holds_alternative<NOParams>(p))
    return CoarseState(rhs_no_raw(x[0], std::get<NOParams>(p)));
  return rhs_co_raw(x, std::get<COParams>(p));
}

inline CoarseState rhs(const MechanismParams& p, const CoarseState& x,
                       double tol = 1e-12) {
  if (std::holds_alternative<NOParams>(p)) {
    if (x.dim() != 1) throw std::domain_error("NO state must have one component");
    return CoarseState(rhs_no(x[0], std::get<NOParams>(p), tol));
  }
  return rhs_co(x, std::get<COParams>(p), tol);
}

// --- Jacobians -----------------------------------------------------------

inline double jacobian_no(double theta, const NOParams& p) {
  return -p.alpha - p.gamma - p.k * (1.0 - theta) * (1.0 - 3.0 * theta);
}

struct Jacobian2 {
  double a00, a01, a10, a11;
  double trace() const { return a00 + a11; }
  double det() const { return a00 * a11 - a01 * a10; }
};

inline Jacobian2 jacobian_co(const CoarseState& x, const COParams& p) {
  const double a = x[0], b = x[1];
  const double v = 1.0 - a - b;
  return Jacobian2{-p.alpha - p.gamma - 4.0 * p.k_r * b,
                   -p.alpha - 4.0 * p.k_r * a,
                   -4.0 * p.beta * v - 4.0 * p.k_r * b,
                   -4.0 * p.beta * v - 4.0 * p.k_r * a};
}

// --- parameter plumbing --------------------------------------------------

inline std::size_t state_dim(const MechanismParams& p) {
  return std::holds_alternative<NOParams>(p) ? 1 : 2;
}

inline std::string_view mechanism_name(const MechanismParams& p) {
  return std::holds_alternative<NOParams>(p) ? "no" : "co";
}

/// The manipulated process parameter: k for NO reduction, beta for CO oxidation.
inline double control_value(const MechanismParams& p) {
  if (std::holds_alternative<NOParams>(p)) return std::get<NOParams>(p).k;
  return std::get<COParams>(p).beta;
}

inline MechanismParams with_control(MechanismParams p, double value) {
  if (std::holds_alternative<NOParams>(p))
    std::get<NOParams>(p).k = value;
  else
    std::get<COParams>(p).beta = value;
  return p;
}

inline std::string_view default_scan_param(const MechanismParams& p) {
  return std::holds_alternative<NOParams>(p) ? "k" : "beta";
}

inline MechanismParams with_named_param(MechanismParams p, std::string_view name,
                                        double value) {
  if (auto* q = std::get_if<NOParams>(&p)) {
    if (name == "alpha") q->alpha = value;
    else if (name == "gamma") q->gamma = value;
    else if (name == "k") q->k = value;
    else throw std::invalid_argument("unknown NO parameter: " + std::string(name));
  } else {
    auto& c = std::get<COParams>(p);
    if (name == "alpha") c.alpha = value;
    else if (name == "beta") c.beta = value;
    else if (name == "gamma") c.gamma = value;
    else if (name == "k_r") c.k_r = value;
    else throw std::invalid_argument("unknown CO parameter: " + std::string(name));
  }
  return p;
}

inline double named_param(const MechanismParams& p, std::string_view name) {
  if (const auto* q = std::get_if<NOParams>(&p)) {
    if (name == "alpha") return q->alpha;
    if (name == "gamma") return q->gamma;
    if (name == "k") return q->k;
    throw std::invalid_argument("unknown NO parameter: " + std::string(name));
  }
  const auto& c = std::get<COParams>(p);
  if (name == "alpha") return c.alpha;
  if (name == "beta") return c.beta;
  if (name == "gamma") return c.gamma;
  if (name == "k_r") return c.k_r;
  throw std::invalid_argument("unknown CO parameter: " + std::string(name));
}

}  // namespace coarseopt
