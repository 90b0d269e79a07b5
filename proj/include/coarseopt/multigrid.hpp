#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "coarseopt/objective.hpp"
#include "coarseopt/optim.hpp"
#include "coarseopt/spline.hpp"

namespace coarseopt {

/// Resamples a policy onto a finer interval length with the horizon N*T
/// preserved: a natural cubic spline through (interval midpoints, p_i)
/// evaluated at the new midpoints, clipped to the box.
inline Policy refine_timestep(const Policy& policy, double new_T,
                              const std::array<double, 2>& box = {
                                  -std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity()}) {
  validate_policy(policy);
  if (!(new_T > 0)) throw std::invalid_argument("refine: new_T must be > 0");
  if (new_T > policy.T + 1e-12)
    throw std::invalid_argument("refine: new_T must not exceed the current T");
  const double t_f = policy.horizon();
  const double ratio = t_f / new_T;
  const auto new_n = static_cast<std::size_t>(std::llround(ratio));
  if (new_n < 1 || std::abs(double(new_n) * new_T - t_f) > 1e-9)
    throw std::invalid_argument("refine: horizon not divisible by new_T");
  if (std::abs(new_T - policy.T) <= 1e-12) return policy;

  std::vector<double> mids(policy.n_intervals());
  for (std::size_t i = 0; i < mids.size(); ++i) mids[i] = (double(i) + 0.5) * policy.T;
  CubicSpline spl(std::move(mids), policy.values);

  Policy out;
  out.T = new_T;
  out.p_ss = policy.p_ss;
  out.values.resize(new_n);
  for (std::size_t i = 0; i < new_n; ++i) {
    const double t = (double(i) + 0.5) * new_T;
    out.values[i] = std::clamp(spl(t), box[0], box[1]);
  }
  return out;
}

struct MultigridOptions {
  std::vector<double> t_schedule;  // decreasing interval lengths
  std::vector<double> scales{1.0, 0.5, 0.25, 0.125};
  double scale_decay{1.0};  // per-stage multiplier on the ladder
  std::size_t max_evals_per_stage{100000};
  std::size_t restarts_per_stage{1};
  double agreement_tol{0.01};
  bool final_second_pass{true};
};

struct MultigridStage {
  double T{0.0};
  double best_f{0.0};
  std::size_t eval_count{0};
  Policy policy;
};

struct MultigridResult {
  std::vector<MultigridStage> stages;
  Policy final_policy;
  double final_f{0.0};
  std::size_t eval_count{0};
  bool budget_exhausted{false};
};

/// Solves a chain of policy searches from coarse to fine interval lengths,
/// warm-starting each stage by spline resampling of the previous optimum,
/// optionally finishing with a second pass at the finest T. Stage k gets the
/// base scale ladder multiplied by scale_decay^k and the stage seed
/// derive_key(seed, "stage", k).
inline MultigridResult multigrid_search(const SwitchingProblem& prob,
                                        const Stepper& stepper, double t_f,
                                        const MultigridOptions& opt,
                                        const Optimizer& optimizer,
                                        std::uint64_t seed,
                                        const Policy& warm_start = {}) {
  if (opt.t_schedule.empty())
    throw std::invalid_argument("multigrid: empty schedule");
  for (std::size_t k = 0; k < opt.t_schedule.size(); ++k) {
    const double T = opt.t_schedule[k];
    if (!(T > 0)) throw std::invalid_argument("multigrid: T must be > 0");
    if (k > 0 && !(T < opt.t_schedule[k - 1]))
      throw std::invalid_argument("multigrid: schedule must be decreasing");
    const double n = t_f / T;
    if (std::abs(std::round(n) * T - t_f) > 1e-9)
      throw std::invalid_argument("multigrid: T must divide the horizon");
  }

  MultigridResult res;
  Policy current = warm_start;
  std::vector<double> passes_T = opt.t_schedule;
  if (opt.final_second_pass) passes_T.push_back(opt.t_schedule.back());

  double ladder_factor = 1.0;
  for (std::size_t k = 0; k < passes_T.size(); ++k) {
    const double T = passes_T[k];
    const auto n = static_cast<std::size_t>(std::llround(t_f / T));
    if (current.values.empty()) {
      current = constant_policy(T, n, prob.p_ss, prob.p_ss);
    } else if (std::abs(current.T - T) > 1e-12) {
      current = refine_timestep(current, T, prob.param_box);
    }

    SearchSpec spec;
    spec.x0 = current.values;
    spec.max_evals = opt.max_evals_per_stage;
    spec.scales = opt.scales;
    for (auto& s : spec.scales) s *= ladder_factor;
    spec.objective = make_policy_objective(prob, stepper, T,
                                           derive_key(seed, "stage", k));

    SearchTrace t = opt.restarts_per_stage > 1
                        ? restart_until_stable(optimizer, spec, opt.agreement_tol,
                                               opt.restarts_per_stage)
                        : optimizer(spec);
    current.T = T;
    current.p_ss = prob.p_ss;
    current.values = t.best_x;

    res.stages.push_back({T, t.best_f, t.eval_count, current});
    res.eval_count += t.eval_count;
    res.budget_exhausted = res.budget_exhausted || t.budget_exhausted;
    ladder_factor *= opt.scale_decay;
  }
  res.final_policy = res.stages.back().policy;
  res.final_f = res.stages.back().best_f;
  return res;
}

}  // namespace coarseopt
