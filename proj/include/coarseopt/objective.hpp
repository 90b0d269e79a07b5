#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "coarseopt/meanfield.hpp"
#include "coarseopt/policy.hpp"
#include "coarseopt/stepper.hpp"

namespace coarseopt {

/// A switch between two coexisting stationary states under minimal parameter
/// actuation: start/target states, nominal parameter, penalty shape, and the
/// feasible box for the manipulated parameter.
struct SwitchingProblem {
  MechanismParams params;  // nominal mechanism (control at p_ss)
  CoarseState x_start;
  CoarseState x_target;
  double p_ss{0.0};
  double epsilon{0.05};
  double w_scale{50.0};
  double q_decay_amp{0.3};
  double q_decay_rate{1.0};
  std::array<double, 2> param_box{0.0, 20.0};
  double infeasible_scale{1e6};
};

/// Checks that x_start/x_target are stationary at p_ss (residual < 1e-8).
inline void validate(const SwitchingProblem& prob) {
  if (!(prob.epsilon > 0)) throw std::invalid_argument("problem: epsilon must be > 0");
  if (!(prob.param_box[0] <= prob.param_box[1]))
    throw std::invalid_argument("problem: empty parameter box");
  if (std::abs(control_value(prob.params) - prob.p_ss) > 1e-12)
    throw std::invalid_argument("problem: params not at nominal p_ss");
  for (const CoarseState* x : {&prob.x_start, &prob.x_target}) {
    if (x->dim() != state_dim(prob.params))
      throw std::invalid_argument("problem: state dimension mismatch");
    if (max_abs(rhs(prob.params, *x, 1e-9)) >= 1e-8)
      throw std::invalid_argument("problem: start/target not stationary at p_ss");
  }
}

struct ObjectiveReport {
  double total{0.0};
  double q_part{0.0};
  double w_part{0.0};
  CoarseState final_state;
  bool feasible{true};
};

/// Actuation cost T * sum_i (p_i - p_ss)^2 (1 - amp e^{-rate t_{i-1}}) with
/// the decision p_i charged at the moment it takes effect, t_{i-1} = (i-1)T.
inline double running_cost(const Policy& policy, double decay_amp = 0.3,
                           double decay_rate = 1.0) {
  validate_policy(policy);
  double q = 0.0;
  for (std::size_t i = 0; i < policy.n_intervals(); ++i) {
    const double dev = policy.values[i] - policy.p_ss;
    const double t = double(i) * policy.T;
    q += dev * dev * (1.0 - decay_amp * std::exp(-decay_rate * t));
  }
  return policy.T * q;
}

/// Terminal penalty w_scale [1 - exp(-sum_j R(|x_j - target_j| - eps))] with
/// R the ramp; zero on the eps-ball, plateau at w_scale.
inline double terminal_penalty(const CoarseState& final_state,
                               const SwitchingProblem& prob) {
  if (final_state.dim() != prob.x_target.dim())
    throw std::invalid_argument("terminal_penalty: dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < final_state.dim(); ++j)
    s += std::max(std::abs(final_state[j] - prob.x_target[j]) - prob.epsilon, 0.0);
  return prob.w_scale * (1.0 - std::exp(-s));
}

inline double box_violation(const std::vector<double>& values,
                            const std::array<double, 2>& box) {
  double v = 0.0;
  for (double p : values)
    v += std::max(box[0] - p, 0.0) + std::max(p - box[1], 0.0);
  return v;
}

/// Full objective: feasibility gate first (big-M penalty grows with the box
/// violation distance and the stepper is never invoked), then rollout from
/// x_start and Q + W.
inline ObjectiveReport evaluate(const Policy& policy, const SwitchingProblem& prob,
                                const Stepper& stepper, std::uint64_t seed) {
  validate_policy(policy);
  if (std::abs(policy.p_ss - prob.p_ss) > 1e-12)
    throw std::invalid_argument("evaluate: policy and problem disagree on p_ss");
  if (stepper.dim() != state_dim(prob.params))
    throw std::invalid_argument("evaluate: stepper dimension mismatch");

  ObjectiveReport rep;
  const double viol = box_violation(policy.values, prob.param_box);
  if (viol > 0.0) {
    rep.total = prob.infeasible_scale * (1.0 + viol);
    rep.final_state = prob.x_start;
    rep.feasible = false;
    return rep;
  }
  const auto traj = rollout(prob.x_start, policy, stepper, seed);
  rep.q_part = running_cost(policy, prob.q_decay_amp, prob.q_decay_rate);
  rep.final_state = traj.back().mean;
  rep.w_part = terminal_penalty(rep.final_state, prob);
  rep.total = rep.q_part + rep.w_part;
  return rep;
}

using ObjectiveFn = std::function<double(const std::vector<double>&)>;
using EvalLogger =
    std::function<void(const std::vector<double>&, const ObjectiveReport&)>;

/// Binds evaluate() to a problem/stepper pair as a plain vector objective.
/// Every call consumes one derived seed (derive_key(seed_base, "eval", n)),
/// so a whole search is reproducible from seed_base alone.
inline ObjectiveFn make_policy_objective(const SwitchingProblem& prob,
                                         const Stepper& stepper, double T,
                                         std::uint64_t seed_base,
                                         EvalLogger logger = {}) {
  auto counter = std::make_shared<std::uint64_t>(0);
  return [&prob, &stepper, T, seed_base, counter,
          logger = std::move(logger)](const std::vector<double>& x) {
    Policy pol;
    pol.T = T;
    pol.p_ss = prob.p_ss;
    pol.values = x;
    const auto rep =
        evaluate(pol, prob, stepper, derive_key(seed_base, "eval", (*counter)++));
    if (logger) logger(x, rep);
    return rep.total;
  };
}

}  // namespace coarseopt
