#include "romflow/fom.hpp"

#include "romflow/executor.hpp"

#include <sstream>

namespace romflow {

namespace {

std::string describe(const ParamPoint& mu) {
  std::ostringstream s;
  s.precision(17);
  s << "mu=(q_dot " << mu.q_dot << ", vel_scale " << mu.vel_scale << ")";
  return s.str();
}

}  // namespace

SnapshotSet generate_snapshots(const FomProblem& p, const std::vector<ParamPoint>& params, const Schedule& schedule,
                               BlockShape shape, int workers) {
  if (params.empty()) throw std::invalid_argument("generate_snapshots: no parameters");
  const Index steps = total_steps(schedule);
  SnapshotSet out;
  out.params = params;
  out.steps_per_param = steps;
  out.snapshots = BlockedMatrix(p.n_dofs(), steps * static_cast<Index>(params.size()), shape);

  TaskGraph graph;
  for (std::size_t i = 0; i < params.size(); ++i) {
    graph.add("fom_" + std::to_string(i), {}, [&, i](const TaskContext&) -> std::any {
      FomSolution sol;
      try {
        sol = solve_fom(p, params[i], schedule);
      } catch (const NewtonError& e) {
        throw NewtonError(std::string(e.what()) + " for " + describe(params[i]), e.step(), e.iterations(),
                          e.residual_norm());
      }
      out.snapshots.set_columns(static_cast<Index>(i) * steps, sol.states);
      return sol.log;
    });
  }
  execute_graph(graph, workers).rethrow_first_failure();
  return out;
}

}  // namespace romflow
