#pragma once

// POD-Galerkin reduced solvers. The reduced residual and Jacobian are
// assembled element by element, sum_e w_e Phi_e^T R_e and
// sum_e w_e Phi_e^T J_e Phi_e, where Phi_e holds the basis rows of the nodes
// of element e. The ROM sums over every element with unit weights; the HROM
// sums over a cubature rule only.

#include "romflow/blocks.hpp"
#include "romflow/ecm.hpp"
#include "romflow/fom.hpp"
#include "romflow/svd.hpp"

#include <atomic>
#include <cstdint>

namespace romflow {

class ReducedModel {
 public:
  ReducedModel(const FomProblem& problem, const Basis& basis);

  const FomProblem& problem() const noexcept { return *problem_; }
  const Dense& phi() const noexcept { return phi_; }
  Index n_modes() const noexcept { return phi_.cols(); }
  /// 3 x N rows of the basis for element e (zero rows at constrained nodes).
  const Dense& phi_e(Index e) const { return phi_e_.at(static_cast<std::size_t>(e)); }
  /// Phi^T w for the mean-temperature functional.
  const Vector& mean_weights() const noexcept { return mean_weights_; }

 private:
  const FomProblem* problem_;
  Dense phi_;
  std::vector<Dense> phi_e_;
  Vector mean_weights_;
};

using RomModel = ReducedModel;

struct HromModel {
  const ReducedModel* reduced = nullptr;
  CubatureRule rule;

  /// Throws std::invalid_argument for an empty rule, IndexError for an
  /// element outside the mesh, and for non-positive weights.
  void validate() const;
};

struct ReducedSolution {
  Dense reduced_states;  // N x steps
  Dense full_states;     // n_dofs x steps; empty for HROM selected_only
  std::vector<double> mean_temperature;
  std::vector<StepLog> log;
  /// Converged projected element residuals, one N_el x N matrix per step
  /// (ROM only, when requested).
  std::vector<Dense> projected_residuals;
  std::uint64_t element_evaluations = 0;
  std::uint64_t assemblies = 0;
};

struct RomOptions {
  NewtonOptions newton;
  bool record_projected_residuals = true;
};

ReducedSolution solve_rom(const RomModel& model, const ParamPoint& mu, const Schedule& schedule,
                          const RomOptions& opt = {});

enum class HromMode { selected_only, full_projection };

ReducedSolution solve_hrom(const HromModel& model, const ParamPoint& mu, const Schedule& schedule,
                           HromMode mode = HromMode::selected_only, const NewtonOptions& opt = {});

struct ProjectedResidualSet {
  BlockedMatrix matrix;      // N_el x (N * m_total); row e holds [R_1e^T | R_2e^T | ...]
  Index n_modes = 0;
  BlockedMatrix rom_states;  // n_dofs x m_total, for Verification 1
};

/// One ROM task per parameter; S_r and the ROM snapshot matrix are
/// allocated before any task runs and filled by column ranges.
ProjectedResidualSet collect_projected_residuals(const RomModel& model, const std::vector<ParamPoint>& params,
                                                 const Schedule& schedule, BlockShape residual_shape,
                                                 BlockShape state_shape, int workers);

/// ||A - B||_F / ||B||_F.
double relative_error(const BlockedMatrix& a, const BlockedMatrix& b);

}  // namespace romflow
