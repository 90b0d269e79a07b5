#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace coarseopt {

/// Piecewise-constant (boxcar) parameter profile: value p_i holds on
/// ((i-1)T, iT]; the nominal p_ss holds for t <= 0 and beyond the horizon.
struct Policy {
  double T{0.0};
  double p_ss{0.0};
  std::vector<double> values;

  std::size_t n_intervals() const { return values.size(); }
  double horizon() const { return T * double(values.size()); }

  double value_at(double t) const {
    if (t <= 0.0 || values.empty()) return p_ss;
    if (t > horizon() + 1e-12 * std::max(1.0, horizon())) return p_ss;
    auto idx = static_cast<std::size_t>(std::ceil(t / T - 1e-9)) - 1;
    if (idx >= values.size()) idx = values.size() - 1;
    return values[idx];
  }
};

inline void validate_policy(const Policy& p) {
  if (!(p.T > 0.0)) throw std::invalid_argument("policy: T must be > 0");
  if (p.values.empty()) throw std::invalid_argument("policy: N must be >= 1");
}

inline Policy constant_policy(double T, std::size_t n, double value, double p_ss) {
  Policy p;
  p.T = T;
  p.p_ss = p_ss;
  p.values.assign(n, value);
  return p;
}

/// On-disk policy record: {mechanism, T, N, p_ss, values[], seed}.
struct PolicyFile {
  std::string mechanism;  // "no" | "co"
  std::uint64_t seed{0};
  Policy policy;
};

}  // namespace coarseopt
