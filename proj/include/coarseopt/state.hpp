#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace coarseopt {

/// Macroscopic coverage vector: 1 component (NO reduction) or 2 (CO oxidation:
/// theta_A = CO, theta_B = O2). Small fixed-capacity value type so integrator
/// stages and ensemble averages stay allocation-free.
class CoarseState {
 public:
  static constexpr std::size_t max_dim = 2;

  CoarseState() = default;
  explicit CoarseState(double theta) : dim_(1), v_{theta, 0.0} {}
  CoarseState(double theta_a, double theta_b) : dim_(2), v_{theta_a, theta_b} {}

  std::size_t dim() const { return dim_; }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }

  double sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += v_[i];
    return s;
  }

  CoarseState& operator+=(const CoarseState& o) {
    for (std::size_t i = 0; i < dim_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  CoarseState& operator-=(const CoarseState& o) {
    for (std::size_t i = 0; i < dim_; ++i) v_[i] -= o.v_[i];
    return *this;
  }
  CoarseState& operator*=(double s) {
    for (std::size_t i = 0; i < dim_; ++i) v_[i] *= s;
    return *this;
  }

  friend CoarseState operator+(CoarseState a, const CoarseState& b) { return a += b; }
  friend CoarseState operator-(CoarseState a, const CoarseState& b) { return a -= b; }
  friend CoarseState operator*(double s, CoarseState a) { return a *= s; }
  friend bool operator==(const CoarseState& a, const CoarseState& b) {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t i = 0; i < a.dim_; ++i)
      if (a.v_[i] != b.v_[i]) return false;
    return true;
  }

 private:
  std::size_t dim_{0};
  std::array<double, max_dim> v_{};
};

inline double max_abs(const CoarseState& x) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

inline double norm2(const CoarseState& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

/// Every component a fraction in [0,1] (within tol); in 2-D the occupied
/// fraction theta_A + theta_B must not exceed 1.
inline bool coverages_valid(const CoarseState& x, double tol = 1e-12) {
  if (x.dim() == 0) return false;
  for (std::size_t i = 0; i < x.dim(); ++i)
    if (!(x[i] >= -tol && x[i] <= 1.0 + tol)) return false;
  if (x.dim() == 2 && x.sum() > 1.0 + tol) return false;
  return true;
}

inline void require_coverages(const CoarseState& x, double tol = 1e-12) {
  if (!coverages_valid(x, tol))
    throw std::domain_error("coverage vector outside the unit simplex");
}

}  // namespace coarseopt
