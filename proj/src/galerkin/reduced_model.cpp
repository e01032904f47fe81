#include "romflow/galerkin.hpp"

#include "romflow/errors.hpp"

namespace romflow {

ReducedModel::ReducedModel(const FomProblem& problem, const Basis& basis) : problem_(&problem) {
  if (basis.vectors.empty()) throw std::invalid_argument("reduced model needs a non-empty basis");
  if (basis.vectors.rows() != problem.n_dofs()) {
    throw ShapeError("basis has " + std::to_string(basis.vectors.rows()) + " rows, problem has " +
                     std::to_string(problem.n_dofs()) + " dofs");
  }
  phi_ = basis.vectors.to_dense();
  const Index n = phi_.cols();
  phi_e_.reserve(static_cast<std::size_t>(problem.n_elements()));
  for (Index e = 0; e < problem.n_elements(); ++e) {
    Dense pe = Dense::Zero(3, n);
    const auto dofs = problem.mesh().element_dofs(e);
    for (int a = 0; a < 3; ++a) {
      if (dofs[static_cast<std::size_t>(a)] >= 0) pe.row(a) = phi_.row(dofs[static_cast<std::size_t>(a)]);
    }
    phi_e_.push_back(std::move(pe));
  }
  mean_weights_ = phi_.transpose() * mean_temperature_weights(problem);
}

void HromModel::validate() const {
  if (reduced == nullptr) throw std::invalid_argument("HROM has no reduced model");
  if (rule.elements.empty()) throw std::invalid_argument("HROM cubature rule is empty");
  if (rule.elements.size() != rule.weights.size()) {
    throw std::invalid_argument("HROM cubature rule has mismatched element and weight counts");
  }
  const Index n_el = reduced->problem().n_elements();
  for (std::size_t k = 0; k < rule.elements.size(); ++k) {
    const Index e = rule.elements[k];
    if (e < 0 || e >= n_el) {
      throw IndexError("HROM element " + std::to_string(e) + " outside [0, " + std::to_string(n_el) + ")");
    }
    if (!(rule.weights[k] > 0.0)) throw std::invalid_argument("HROM weights must be positive");
  }
}

}  // namespace romflow
