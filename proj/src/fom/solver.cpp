#include "romflow/fom.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace romflow {

bool newton_converged(double res, double res0, double step, double state, const NewtonOptions& opt) {
  if (res <= opt.abs_floor || res <= opt.rel_tol * res0) return true;
  return step >= 0.0 && step <= opt.rel_tol * state;
}

namespace {

using Lu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

std::unique_ptr<Lu> factor(const SparseMatrix& j) {
  auto lu = std::make_unique<Lu>();
  lu->compute(j);
  if (lu->info() != Eigen::Success) throw std::runtime_error("sparse LU factorization failed");
  return lu;
}

}  // namespace

FomSolution solve_fom(const FomProblem& p, const ParamPoint& mu, const Schedule& schedule, const NewtonOptions& opt) {
  const Index n = p.n_dofs();
  FomSolution out;
  out.states.resize(n, total_steps(schedule));
  out.log.reserve(static_cast<std::size_t>(out.states.cols()));

  Vector d_prev = Vector::Zero(n);
  Index step = 0;
  for (const Phase& phase : schedule) {
    const Forcing f = forcing_for(mu, phase);
    // The Jacobian of the linear problem is constant within a phase.
    std::unique_ptr<Lu> cached;
    if (p.is_linear() && n > 0) cached = factor(jacobian(p, d_prev, f));

    for (Index s = 0; s < phase.steps; ++s, ++step) {
      Vector d = d_prev;
      Vector r = residual(p, d, d_prev, f);
      const double r0 = r.norm();
      double rn = r0;
      int it = 0;
      bool done = r0 <= opt.abs_floor;
      while (!done) {
        if (it == opt.max_iter) {
          std::ostringstream msg;
          msg << "FOM Newton did not converge at step " << step << " after " << it << " iterations (residual "
              << rn << ")";
          throw NewtonError(msg.str(), static_cast<long>(step), it, rn);
        }
        Vector delta;
        if (cached) {
          delta = cached->solve(-r);
        } else {
          delta = factor(jacobian(p, d, f))->solve(-r);
        }
        d += delta;
        ++it;
        r = residual(p, d, d_prev, f);
        rn = r.norm();
        if (!std::isfinite(rn)) {
          std::ostringstream msg;
          msg << "FOM Newton diverged at step " << step << " after " << it << " iterations";
          throw NewtonError(msg.str(), static_cast<long>(step), it, rn);
        }
        done = newton_converged(rn, r0, delta.norm(), d.norm(), opt);
      }
      out.states.col(step) = d;
      out.log.push_back(StepLog{step, it, rn});
      d_prev = d;
    }
  }
  return out;
}

FomSolution solve_fom(const FomProblem& p, const ParamPoint& mu) {
  return solve_fom(p, mu, constant_schedule(p.time_steps()));
}

void write_step_log(const std::filesystem::path& path, const std::vector<StepLog>& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,newton_iters,residual_norm\n";
  out.precision(17);
  for (const auto& l : log) out << l.step << ',' << l.newton_iters << ',' << l.residual_norm << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace romflow
