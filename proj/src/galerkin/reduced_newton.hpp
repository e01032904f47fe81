#pragma once

// Element-wise reduced Newton solver shared by the ROM and the HROM.

#include "romflow/galerkin.hpp"

#include <span>

namespace romflow::detail {

struct ReducedRun {
  std::span<const Index> elements;
  std::span<const double> weights;  // empty for unit weights
  bool record_residuals = false;    // fill projected_residuals (all-element runs)
  bool reconstruct = true;          // fill full_states
};

ReducedSolution solve_reduced(const ReducedModel& model, const ParamPoint& mu, const Schedule& schedule,
                              const ReducedRun& run, const NewtonOptions& opt, const char* label);

}  // namespace romflow::detail
