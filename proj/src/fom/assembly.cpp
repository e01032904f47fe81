#include "romflow/fom.hpp"

#include <string>

namespace romflow {

namespace {

void check_element(const FomProblem& p, Index e) {
  if (e < 0 || e >= p.n_elements()) {
    throw IndexError("element " + std::to_string(e) + " outside [0, " + std::to_string(p.n_elements()) + ")");
  }
}

}  // namespace

Vector3 gather(const FomProblem& p, Index e, const Vector& d) {
  const auto dofs = p.mesh().element_dofs(e);
  Vector3 out;
  for (int i = 0; i < 3; ++i) out(i) = dofs[static_cast<std::size_t>(i)] >= 0 ? d(dofs[static_cast<std::size_t>(i)]) : 0.0;
  return out;
}

Vector3 element_residual(const FomProblem& p, Index e, const Vector3& d_e, const Vector3& d_prev_e, Forcing f) {
  check_element(p, e);
  const ElementData& ed = p.element(e);
  const Matrix3 op = ed.stiffness + f.velocity * ed.convection;
  const double lump = p.reaction_cubic() * ed.area / 3.0;
  const Vector3 a_now = op * d_e + lump * d_e.array().cube().matrix();
  Vector3 r = ed.mass * (d_e - d_prev_e) / p.dt() + p.theta() * a_now - f.source * ed.load;
  if (p.theta() != 1.0) {
    r += (1.0 - p.theta()) * (op * d_prev_e + lump * d_prev_e.array().cube().matrix());
  }
  const auto dofs = p.mesh().element_dofs(e);
  for (int i = 0; i < 3; ++i) {
    if (dofs[static_cast<std::size_t>(i)] < 0) r(i) = 0.0;
  }
  return r;
}

Matrix3 element_jacobian(const FomProblem& p, Index e, const Vector3& d_e, Forcing f) {
  check_element(p, e);
  const ElementData& ed = p.element(e);
  Matrix3 j = ed.mass / p.dt() + p.theta() * (ed.stiffness + f.velocity * ed.convection);
  if (p.reaction_cubic() != 0.0) {
    const double lump = p.reaction_cubic() * ed.area / 3.0;
    j += p.theta() * (3.0 * lump * d_e.array().square()).matrix().asDiagonal();
  }
  const auto dofs = p.mesh().element_dofs(e);
  for (int i = 0; i < 3; ++i) {
    if (dofs[static_cast<std::size_t>(i)] < 0) {
      j.row(i).setZero();
      j.col(i).setZero();
    }
  }
  return j;
}

Vector residual(const FomProblem& p, const Vector& d, const Vector& d_prev, Forcing f) {
  if (d.size() != p.n_dofs() || d_prev.size() != p.n_dofs()) {
    throw ShapeError("residual: state length " + std::to_string(d.size()) + ", expected " +
                     std::to_string(p.n_dofs()));
  }
  Vector r = Vector::Zero(p.n_dofs());
  for (Index e = 0; e < p.n_elements(); ++e) {
    const Vector3 re = element_residual(p, e, gather(p, e, d), gather(p, e, d_prev), f);
    const auto dofs = p.mesh().element_dofs(e);
    for (int i = 0; i < 3; ++i) {
      if (dofs[static_cast<std::size_t>(i)] >= 0) r(dofs[static_cast<std::size_t>(i)]) += re(i);
    }
  }
  return r;
}

SparseMatrix jacobian(const FomProblem& p, const Vector& d, Forcing f) {
  if (d.size() != p.n_dofs()) throw ShapeError("jacobian: state length mismatch");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(9 * p.n_elements()));
  for (Index e = 0; e < p.n_elements(); ++e) {
    const Matrix3 je = element_jacobian(p, e, gather(p, e, d), f);
    const auto dofs = p.mesh().element_dofs(e);
    for (int i = 0; i < 3; ++i) {
      if (dofs[static_cast<std::size_t>(i)] < 0) continue;
      for (int k = 0; k < 3; ++k) {
        if (dofs[static_cast<std::size_t>(k)] < 0) continue;
        trips.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(k)], je(i, k));
      }
    }
  }
  SparseMatrix j(p.n_dofs(), p.n_dofs());
  j.setFromTriplets(trips.begin(), trips.end());
  return j;
}

}  // namespace romflow
