#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "coarseopt/kmc.hpp"
#include "coarseopt/meanfield.hpp"
#include "coarseopt/parallel.hpp"
#include "coarseopt/policy.hpp"
#include "coarseopt/rng.hpp"

namespace coarseopt {

/// Ensemble-variance protocol knobs: lattice size N_l, replica count M_r with
/// bounds [M_min, M_max], and the variance limit d_max.
struct EnsembleConfig {
  std::size_t n_sites{10000};
  std::size_t m_replicas{200};
  std::size_t m_min{2};
  std::size_t m_max{200};
  double d_max{1e9};  // effectively off unless configured
  bool record_samples{false};
};

inline void validate(const EnsembleConfig& c) {
  if (c.n_sites < 1) throw std::invalid_argument("ensemble: n_sites must be >= 1");
  if (!(c.m_min <= c.m_replicas && c.m_replicas <= c.m_max))
    throw std::invalid_argument("ensemble: need m_min <= m_replicas <= m_max");
  if (!(c.d_max > 0)) throw std::invalid_argument("ensemble: d_max must be > 0");
}

/// One coarse time step: ensemble mean, per-component ensemble variance
/// d = std(mean estimate)/|mean| (the relative standard error, which is what
/// adding replicas reduces at the M_r^{-1/2} rate), and the replica count
/// actually used.
struct StepResult {
  CoarseState mean;
  CoarseState d;
  std::size_t m_used{0};
  std::vector<CoarseState> samples;  // populated when record_samples is set
};

namespace detail {

// near-zero means: report plain std instead of std/mean
constexpr double kMeanFloor = 1e-9;

// Fixed-tree pairwise sum: deterministic regardless of thread count, and
// exact for ensembles of identical values (frozen dynamics).
template <class Get>
double pairwise_sum(std::size_t lo, std::size_t hi, const Get& get) {
  if (hi - lo == 1) return get(lo);
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, get) + pairwise_sum(mid, hi, get);
}

inline void mean_and_d(const std::vector<CoarseState>& xs, std::size_t m,
                       CoarseState& mean, CoarseState& d) {
  mean = xs[0];
  d = xs[0];
  d *= 0.0;
  for (std::size_t i = 0; i < mean.dim(); ++i)
    mean[i] = pairwise_sum(0, m, [&](std::size_t r) { return xs[r][i]; }) / double(m);
  if (m < 2) return;
  for (std::size_t i = 0; i < mean.dim(); ++i) {
    const double ss = pairwise_sum(0, m, [&](std::size_t r) {
      const double e = xs[r][i] - mean[i];
      return e * e;
    });
    const double sd_of_mean = std::sqrt(ss / double(m - 1)) / std::sqrt(double(m));
    d[i] = std::abs(mean[i]) < kMeanFloor ? sd_of_mean : sd_of_mean / std::abs(mean[i]);
  }
}

}  // namespace detail

/// Discrete-time coarse map estimator: x_{i+1} = G_T(x_i, p_{i+1}).
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual StepResult step(const CoarseState& x, double control, double T,
                          std::uint64_t seed) const = 0;
  virtual std::size_t dim() const = 0;
  virtual bool deterministic() const = 0;
};

/// Deterministic stand-in backed by the mean-field ODEs ("legacy" mode).
class LegacyStepper final : public Stepper {
 public:
  explicit LegacyStepper(MechanismParams base, OdeOptions opt = {})
      : base_(std::move(base)), opt_(opt) {
    require_rates(base_);
  }

  StepResult step(const CoarseState& x, double control, double T,
                  std::uint64_t /*seed*/) const override {
    StepResult r;
    r.mean = integrate(with_control(base_, control), x, T, opt_);
    r.d = r.mean;
    r.d *= 0.0;
    r.m_used = 1;
    return r;
  }

  std::size_t dim() const override { return state_dim(base_); }
  bool deterministic() const override { return true; }

  const MechanismParams& params() const { return base_; }

 private:
  MechanismParams base_;
  OdeOptions opt_;
};

/// KMC-backed coarse time-stepper: lift an ensemble, run SSA replicas for T,
/// restrict and average. If d exceeds d_max the replica count doubles
/// (reusing finished replicas, clamped to [m_min, m_max]) and the average is
/// recomputed; d > d_max at m_max is reported, not raised.
class KmcStepper final : public Stepper {
 public:
  KmcStepper(MechanismParams base, EnsembleConfig cfg, unsigned threads = 1)
      : base_(std::move(base)), cfg_(cfg), threads_(threads == 0 ? 1 : threads) {
    require_rates(base_);
    validate(cfg_);
  }

  StepResult step(const CoarseState& x, double control, double T,
                  std::uint64_t seed) const override {
    const MechanismParams params = with_control(base_, control);
    std::size_t m = std::clamp(cfg_.m_replicas, cfg_.m_min, cfg_.m_max);
    std::vector<CoarseState> xs(m);
    std::size_t computed = 0;

    StepResult r;
    for (;;) {
      xs.resize(m);
      parallel_for(computed, m, threads_, [&](std::size_t rep) {
        RngStream rng(derive_key(seed, rep));
        MicroState micro = lift(x, cfg_.n_sites);
        if (const auto* q = std::get_if<NOParams>(&params)) {
          micro = ssa_run(std::move(micro), *q, T, rng);
        } else {
          micro = ssa_run(std::move(micro), std::get<COParams>(params), T, rng);
        }
        xs[rep] = restrict_state(micro);
      });
      computed = m;
      detail::mean_and_d(xs, m, r.mean, r.d);
      if (max_abs(r.d) <= cfg_.d_max || m >= cfg_.m_max) break;
      m = std::min(2 * m, cfg_.m_max);
    }
    r.m_used = m;
    if (cfg_.record_samples) r.samples = std::move(xs);
    return r;
  }

  std::size_t dim() const override { return state_dim(base_); }
  bool deterministic() const override { return false; }

  const MechanismParams& params() const { return base_; }
  const EnsembleConfig& config() const { return cfg_; }

 private:
  MechanismParams base_;
  EnsembleConfig cfg_;
  unsigned threads_;
};

// Free-function forms of the two step operations.
inline StepResult coarse_step(const CoarseState& x, double control, double T,
                              const MechanismParams& base,
                              const EnsembleConfig& cfg, std::uint64_t seed,
                              unsigned threads = 1) {
  return KmcStepper(base, cfg, threads).step(x, control, T, seed);
}

inline StepResult legacy_step(const CoarseState& x, double control, double T,
                              const MechanismParams& base,
                              const OdeOptions& opt = {}) {
  return LegacyStepper(base, opt).step(x, control, T, 0);
}

/// Sequential composition of coarse steps over the policy horizon. Each
/// interval re-lifts from the previous ensemble mean; interval i uses the
/// stage key derive_key(seed, "interval", i).
inline std::vector<StepResult> rollout(const CoarseState& x0, const Policy& policy,
                                       const Stepper& stepper, std::uint64_t seed) {
  validate_policy(policy);
  std::vector<StepResult> out;
  out.reserve(policy.n_intervals());
  CoarseState x = x0;
  for (std::size_t i = 0; i < policy.n_intervals(); ++i) {
    out.push_back(stepper.step(x, policy.values[i], policy.T,
                               derive_key(seed, "interval", i)));
    x = out.back().mean;
  }
  return out;
}

}  // namespace coarseopt
