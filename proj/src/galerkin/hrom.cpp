#include "romflow/galerkin.hpp"

#include "reduced_newton.hpp"

namespace romflow {

ReducedSolution solve_hrom(const HromModel& model, const ParamPoint& mu, const Schedule& schedule, HromMode mode,
                           const NewtonOptions& opt) {
  model.validate();
  detail::ReducedRun run;
  run.elements = model.rule.elements;
  run.weights = model.rule.weights;
  run.reconstruct = mode == HromMode::full_projection;
  return detail::solve_reduced(*model.reduced, mu, schedule, run, opt, "HROM");
}

}  // namespace romflow
