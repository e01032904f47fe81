#include "romflow/fom.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace romflow {

Schedule constant_schedule(Index steps) { return Schedule{Phase{steps, 1.0, 1.0}}; }

Index total_steps(const Schedule& schedule) {
  return std::accumulate(schedule.begin(), schedule.end(), Index{0},
                         [](Index acc, const Phase& ph) { return acc + ph.steps; });
}

Forcing forcing_for(const ParamPoint& mu, const Phase& phase) {
  return Forcing{mu.q_dot * phase.source_factor, mu.vel_scale * phase.flow_factor};
}

FomProblem::FomProblem(Mesh mesh, std::vector<Point> velocity, std::vector<double> source_shape,
                       double diffusivity, double reaction_cubic, Index time_steps, double dt, double theta)
    : mesh_(std::move(mesh)),
      velocity_(std::move(velocity)),
      source_shape_(std::move(source_shape)),
      diffusivity_(diffusivity),
      reaction_cubic_(reaction_cubic),
      time_steps_(time_steps),
      dt_(dt),
      theta_(theta) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(diffusivity_ > 0.0)) throw std::invalid_argument("diffusivity must be positive");
  if (reaction_cubic_ < 0.0) throw std::invalid_argument("reaction coefficient must be nonnegative");
  if (theta_ < 0.0 || theta_ > 1.0) throw std::invalid_argument("theta must lie in [0, 1]");
  if (time_steps_ < 1) throw std::invalid_argument("time_steps must be positive");
  if (velocity_.size() != mesh_.nodes.size() || source_shape_.size() != mesh_.nodes.size()) {
    throw ShapeError("velocity and source fields need one value per node");
  }

  data_.resize(mesh_.elements.size());
  for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
    const auto& el = mesh_.elements[e];
    std::array<Point, 3> x;
    for (int i = 0; i < 3; ++i) x[static_cast<std::size_t>(i)] = mesh_.nodes[static_cast<std::size_t>(el[static_cast<std::size_t>(i)])];
    const double twice_area = (x[1] - x[0]).x() * (x[2] - x[0]).y() - (x[2] - x[0]).x() * (x[1] - x[0]).y();
    ElementData& ed = data_[e];
    ed.area = 0.5 * twice_area;

    // Gradients of the linear shape functions.
    Vector3 gx, gy;
    for (int i = 0; i < 3; ++i) {
      const Point& pj = x[static_cast<std::size_t>((i + 1) % 3)];
      const Point& pk = x[static_cast<std::size_t>((i + 2) % 3)];
      gx(i) = (pj.y() - pk.y()) / twice_area;
      gy(i) = (pk.x() - pj.x()) / twice_area;
    }
    ed.stiffness = diffusivity_ * ed.area * (gx * gx.transpose() + gy * gy.transpose());
    ed.mass = ed.area / 12.0 * (Matrix3::Ones() + Matrix3::Identity());
    ed.convection.setZero();
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) {
        const Point& v = velocity_[static_cast<std::size_t>(el[static_cast<std::size_t>(k)])];
        const double w = ed.area / 12.0 * (i == k ? 2.0 : 1.0);
        ed.convection.row(i) += w * (v.x() * gx + v.y() * gy).transpose();
      }
    }
    Vector3 s;
    for (int i = 0; i < 3; ++i) s(i) = source_shape_[static_cast<std::size_t>(el[static_cast<std::size_t>(i)])];
    ed.load = ed.mass * s;
  }
}

FomProblem FomProblem::desk(const ProblemSpec& spec) {
  Mesh mesh = Mesh::unit_square(spec.mesh_n);
  std::vector<Point> vel;
  vel.reserve(mesh.nodes.size());
  constexpr double pi = std::numbers::pi;
  for (const Point& x : mesh.nodes) {
    vel.emplace_back(-std::sin(pi * x.x()) * std::cos(pi * x.y()), std::cos(pi * x.x()) * std::sin(pi * x.y()));
  }
  std::vector<double> source(mesh.nodes.size(), 1.0);
  return FomProblem(std::move(mesh), std::move(vel), std::move(source), spec.diffusivity, spec.reaction_cubic,
                    spec.time_steps, spec.dt, spec.theta);
}

Vector mean_temperature_weights(const FomProblem& p) {
  Vector w = Vector::Zero(p.n_dofs());
  double total = 0.0;
  for (Index e = 0; e < p.n_elements(); ++e) {
    const double a = p.element(e).area;
    total += a;
    for (Index dof : p.mesh().element_dofs(e)) {
      if (dof >= 0) w(dof) += a / 3.0;
    }
  }
  return w / total;
}

}  // namespace romflow
