// scratch driver for preset calibration; not installed
#include <cstdio>
#include <string>

#include "coarseopt/multigrid.hpp"
#include "coarseopt/objective.hpp"
#include "coarseopt/optim.hpp"

using namespace coarseopt;

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "no-legacy";

  const NOParams no{1.0, 0.01, 4.5};
  const COParams co{1.6, 3.5, 0.04, 1.0};

  auto no_problem = [&] {
    const auto states = find_steady_states(MechanismParams{no});
    SwitchingProblem prob;
    prob.params = MechanismParams{no};
    prob.x_start = states[0].state;
    prob.x_target = states[2].state;
    prob.p_ss = no.k;
    return prob;
  }();
  auto co_problem = [&] {
    const auto states = find_steady_states(MechanismParams{co});
    SwitchingProblem prob;
    prob.params = MechanismParams{co};
    prob.x_start = states[0].state;
    prob.x_target = states[2].state;
    prob.p_ss = co.beta;
    return prob;
  }();

  if (mode == "no-legacy") {
    LegacyStepper stepper{no_problem.params};
    for (const auto& scales : std::vector<std::vector<double>>{
             {1.0, 0.5, 0.25, 0.125},
             {2.0, 1.0, 0.5, 0.25, 0.125},
             {4.0, 2.0, 1.0, 0.5, 0.25, 0.125},
         }) {
      SearchSpec spec;
      spec.x0.assign(20, no_problem.p_ss);
      spec.scales = scales;
      spec.max_evals = 200000;
      spec.objective = make_policy_objective(no_problem, stepper, 0.25, 1);
      const auto t = restart_until_stable(hooke_jeeves, spec, 0.01, 5);
      std::printf("scales[0]=%g: best=%.6f evals=%zu passes=%zu\n", scales[0],
                  t.best_f, t.eval_count, t.passes);
      Policy pol;
      pol.T = 0.25;
      pol.p_ss = no_problem.p_ss;
      pol.values = t.best_x;
      const auto rep = evaluate(pol, no_problem, stepper, 0);
      std::printf("  q=%.4f w=%.6f final=%.5f\n", rep.q_part, rep.w_part,
                  rep.final_state[0]);
      std::printf("  values:");
      for (double v : t.best_x) std::printf(" %.3f", v);
      std::printf("\n");
    }
  } else if (mode == "no-if") {
    LegacyStepper stepper{no_problem.params};
    SearchSpec spec;
    spec.x0.assign(20, no_problem.p_ss);
    spec.scales = {2.0, 1.0, 0.5, 0.25, 0.125};
    spec.max_evals = 200000;
    spec.objective = make_policy_objective(no_problem, stepper, 0.25, 1);
    const auto t = restart_until_stable(implicit_filtering, spec, 0.01, 5);
    std::printf("IF: best=%.6f evals=%zu passes=%zu\n", t.best_f, t.eval_count,
                t.passes);
  } else if (mode == "co-legacy") {
    LegacyStepper stepper{co_problem.params};
    for (double T : {0.5, 0.1}) {
      const auto n = static_cast<std::size_t>(std::llround(5.0 / T));
      SearchSpec spec;
      spec.x0.assign(n, co_problem.p_ss);
      spec.scales = {2.0, 1.0, 0.5, 0.25, 0.125};
      spec.max_evals = 200000;
      spec.objective = make_policy_objective(co_problem, stepper, T, 1);
      const auto t = restart_until_stable(hooke_jeeves, spec, 0.01, 3);
      std::printf("CO T=%.2f: best=%.6f evals=%zu passes=%zu\n", T, t.best_f,
                  t.eval_count, t.passes);
    }
  }
  return 0;
}
