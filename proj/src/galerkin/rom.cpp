#include "romflow/galerkin.hpp"

#include "reduced_newton.hpp"

#include "romflow/executor.hpp"

#include <Eigen/LU>

#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

namespace romflow::detail {

namespace {

struct Assembler {
  const ReducedModel& model;
  const ReducedRun& run;
  std::uint64_t evaluations = 0;
  std::uint64_t assemblies = 0;

  double weight(std::size_t k) const { return run.weights.empty() ? 1.0 : run.weights[k]; }

  // Reduced residual; per_element (if given) receives w_e Phi_e^T R_e in row e.
  Vector residual(const Vector& q, const Vector& q_prev, Forcing f, Dense* per_element) {
    const FomProblem& p = model.problem();
    Vector r = Vector::Zero(model.n_modes());
    for (std::size_t k = 0; k < run.elements.size(); ++k) {
      const Index e = run.elements[k];
      const Dense& pe = model.phi_e(e);
      const Vector3 re = element_residual(p, e, pe * q, pe * q_prev, f);
      const Vector contrib = weight(k) * (pe.transpose() * re);
      if (per_element != nullptr) per_element->row(e) = contrib.transpose();
      r += contrib;
    }
    evaluations += run.elements.size();
    ++assemblies;
    return r;
  }

  Dense jacobian(const Vector& q, Forcing f) {
    const FomProblem& p = model.problem();
    Dense j = Dense::Zero(model.n_modes(), model.n_modes());
    for (std::size_t k = 0; k < run.elements.size(); ++k) {
      const Index e = run.elements[k];
      const Dense& pe = model.phi_e(e);
      j.noalias() += weight(k) * (pe.transpose() * element_jacobian(p, e, pe * q, f) * pe);
    }
    return j;
  }
};

}  // namespace

ReducedSolution solve_reduced(const ReducedModel& model, const ParamPoint& mu, const Schedule& schedule,
                              const ReducedRun& run, const NewtonOptions& opt, const char* label) {
  const FomProblem& p = model.problem();
  const Index n = model.n_modes();
  const Index steps = total_steps(schedule);
  Assembler asmb{model, run};

  ReducedSolution out;
  out.reduced_states.resize(n, steps);
  if (run.reconstruct) out.full_states.resize(p.n_dofs(), steps);
  out.mean_temperature.reserve(static_cast<std::size_t>(steps));
  out.log.reserve(static_cast<std::size_t>(steps));
  Dense per_element;
  if (run.record_residuals) {
    per_element = Dense::Zero(p.n_elements(), n);
    out.projected_residuals.reserve(static_cast<std::size_t>(steps));
  }
  Dense* rec = run.record_residuals ? &per_element : nullptr;

  Vector q_prev = Vector::Zero(n);
  Index step = 0;
  for (const Phase& phase : schedule) {
    const Forcing f = forcing_for(mu, phase);
    std::unique_ptr<Eigen::PartialPivLU<Dense>> cached;
    if (p.is_linear()) cached = std::make_unique<Eigen::PartialPivLU<Dense>>(asmb.jacobian(q_prev, f));

    for (Index s = 0; s < phase.steps; ++s, ++step) {
      Vector q = q_prev;
      Vector r = asmb.residual(q, q_prev, f, rec);
      const double r0 = r.norm();
      double rn = r0;
      int it = 0;
      bool done = r0 <= opt.abs_floor;
      while (!done) {
        if (it == opt.max_iter) {
          std::ostringstream msg;
          msg << label << " Newton did not converge at step " << step << " after " << it << " iterations (residual "
              << rn << ")";
          throw NewtonError(msg.str(), static_cast<long>(step), it, rn);
        }
        const Vector delta = cached ? Vector(cached->solve(-r)) : Vector(asmb.jacobian(q, f).partialPivLu().solve(-r));
        q += delta;
        ++it;
        r = asmb.residual(q, q_prev, f, rec);
        rn = r.norm();
        if (!std::isfinite(rn)) {
          std::ostringstream msg;
          msg << label << " Newton diverged at step " << step << " after " << it << " iterations";
          throw NewtonError(msg.str(), static_cast<long>(step), it, rn);
        }
        done = newton_converged(rn, r0, delta.norm(), q.norm(), opt);
      }
      out.reduced_states.col(step) = q;
      if (run.reconstruct) out.full_states.col(step) = model.phi() * q;
      out.mean_temperature.push_back(model.mean_weights().dot(q));
      out.log.push_back(StepLog{step, it, rn});
      if (rec != nullptr) out.projected_residuals.push_back(per_element);
      q_prev = q;
    }
  }
  out.element_evaluations = asmb.evaluations;
  out.assemblies = asmb.assemblies;
  return out;
}

}  // namespace romflow::detail

namespace romflow {

ReducedSolution solve_rom(const RomModel& model, const ParamPoint& mu, const Schedule& schedule,
                          const RomOptions& opt) {
  std::vector<Index> all(static_cast<std::size_t>(model.problem().n_elements()));
  std::iota(all.begin(), all.end(), Index{0});
  detail::ReducedRun run;
  run.elements = all;
  run.record_residuals = opt.record_projected_residuals;
  return detail::solve_reduced(model, mu, schedule, run, opt.newton, "ROM");
}

ProjectedResidualSet collect_projected_residuals(const RomModel& model, const std::vector<ParamPoint>& params,
                                                 const Schedule& schedule, BlockShape residual_shape,
                                                 BlockShape state_shape, int workers) {
  if (params.empty()) throw std::invalid_argument("collect_projected_residuals: no parameters");
  const Index steps = total_steps(schedule);
  const Index n = model.n_modes();
  const Index m_total = steps * static_cast<Index>(params.size());
  ProjectedResidualSet out;
  out.n_modes = n;
  out.matrix = BlockedMatrix(model.problem().n_elements(), n * m_total, residual_shape);
  out.rom_states = BlockedMatrix(model.problem().n_dofs(), m_total, state_shape);

  TaskGraph graph;
  for (std::size_t i = 0; i < params.size(); ++i) {
    graph.add("rom_" + std::to_string(i), {}, [&, i](const TaskContext&) -> std::any {
      const ReducedSolution sol = solve_rom(model, params[i], schedule);
      const Index first = static_cast<Index>(i) * steps;
      out.rom_states.set_columns(first, sol.full_states);
      for (Index s = 0; s < steps; ++s) {
        out.matrix.set_columns((first + s) * n, sol.projected_residuals[static_cast<std::size_t>(s)]);
      }
      return sol.log;
    });
  }
  execute_graph(graph, workers).rethrow_first_failure();
  return out;
}

}  // namespace romflow
