#pragma once

// Parametric full-order model: transient convection-diffusion-reaction on a
// P1 triangle mesh of the unit square with homogeneous Dirichlet boundary,
//
//   dT/dt + (vel_scale v) . grad T - div(diffusivity grad T) + kappa T^3 = q_dot s,
//
// discretized in time with the theta scheme. Residuals and Jacobians are
// assembled element by element so that reduced models can reuse the same
// element kernels.

#include "romflow/blocks.hpp"
#include "romflow/errors.hpp"

#include <Eigen/Sparse>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace romflow {

using Point = Eigen::Vector2d;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct Mesh {
  std::vector<Point> nodes;
  std::vector<std::array<Index, 3>> elements;  // counter-clockwise node triples
  std::vector<Index> dirichlet_nodes;          // sorted
  std::vector<Index> node_dof;                 // -1 for Dirichlet nodes
  Index n_dofs = 0;

  Index n_elements() const noexcept { return static_cast<Index>(elements.size()); }
  /// Global dof per local node, -1 where the node is constrained.
  std::array<Index, 3> element_dofs(Index e) const;

  /// Validates connectivity and numbers the free nodes in ascending order.
  static Mesh from_parts(std::vector<Point> nodes, std::vector<std::array<Index, 3>> elements,
                         std::vector<Index> dirichlet_nodes);
  /// n x n squares, each split along its (0,0)-(1,1) diagonal; the whole
  /// boundary is constrained.
  static Mesh unit_square(Index n);
};

struct ParamPoint {
  double q_dot = 1.0;      // source intensity
  double vel_scale = 1.0;  // convection speed multiplier
};

/// One segment of a time schedule. Factors multiply the parameter values, so
/// a cool-down phase with the flow switched off is {steps, 0, 0}.
struct Phase {
  Index steps = 1;
  double source_factor = 1.0;
  double flow_factor = 1.0;
};
using Schedule = std::vector<Phase>;

Schedule constant_schedule(Index steps);
Index total_steps(const Schedule& schedule);

/// Source and velocity multipliers effective during one time step.
struct Forcing {
  double source = 1.0;
  double velocity = 1.0;
};
Forcing forcing_for(const ParamPoint& mu, const Phase& phase);

struct ElementData {
  double area = 0.0;
  Eigen::Matrix3d stiffness;   // diffusivity included
  Eigen::Matrix3d mass;
  Eigen::Matrix3d convection;  // unit velocity scale
  Eigen::Vector3d load;        // M s_e, unit source intensity
};

struct ProblemSpec {
  Index mesh_n = 32;
  double diffusivity = 0.2;
  double reaction_cubic = 0.0;
  Index time_steps = 27;
  double dt = 0.1;
  double theta = 1.0;
};

class FomProblem {
 public:
  /// velocity and source_shape are nodal fields; velocity is the unscaled
  /// field multiplied by vel_scale at solve time.
  FomProblem(Mesh mesh, std::vector<Point> velocity, std::vector<double> source_shape, double diffusivity,
             double reaction_cubic, Index time_steps, double dt, double theta);

  /// Unit-square mesh, recirculating velocity
  /// v = (-sin(pi x) cos(pi y), cos(pi x) sin(pi y)) and uniform source shape.
  static FomProblem desk(const ProblemSpec& spec);

  const Mesh& mesh() const noexcept { return mesh_; }
  Index n_dofs() const noexcept { return mesh_.n_dofs; }
  Index n_elements() const noexcept { return mesh_.n_elements(); }
  const std::vector<Point>& velocity() const noexcept { return velocity_; }
  double diffusivity() const noexcept { return diffusivity_; }
  double reaction_cubic() const noexcept { return reaction_cubic_; }
  Index time_steps() const noexcept { return time_steps_; }
  double dt() const noexcept { return dt_; }
  double theta() const noexcept { return theta_; }
  const ElementData& element(Index e) const { return data_.at(static_cast<std::size_t>(e)); }
  bool is_linear() const noexcept { return reaction_cubic_ == 0.0; }

 private:
  Mesh mesh_;
  std::vector<Point> velocity_;
  std::vector<double> source_shape_;
  double diffusivity_;
  double reaction_cubic_;
  Index time_steps_;
  double dt_;
  double theta_;
  std::vector<ElementData> data_;
};

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Local state of element e gathered from a global dof vector (zeros at
/// constrained nodes).
Vector3 gather(const FomProblem& p, Index e, const Vector& d);

/// Theta-scheme element residual
///   M (d - d_prev)/dt + theta A(d) + (1 - theta) A(d_prev) - source * f,
/// A(x) = (K + velocity C) x + kappa (area/3) x^3; rows of constrained nodes are zero.
Vector3 element_residual(const FomProblem& p, Index e, const Vector3& d_e, const Vector3& d_prev_e, Forcing f);
/// Derivative of element_residual with respect to d_e; constrained rows and
/// columns are zero.
Matrix3 element_jacobian(const FomProblem& p, Index e, const Vector3& d_e, Forcing f);

Vector residual(const FomProblem& p, const Vector& d, const Vector& d_prev, Forcing f);
SparseMatrix jacobian(const FomProblem& p, const Vector& d, Forcing f);

struct NewtonOptions {
  double rel_tol = 1e-10;
  double abs_floor = 1e-14;
  int max_iter = 25;
};

/// Newton stopping rule shared by the full and reduced solvers: relative
/// residual reduction, absolute floor, or a step below rel_tol of the state.
bool newton_converged(double res, double res0, double step, double state, const NewtonOptions& opt);

struct StepLog {
  Index step = 0;
  int newton_iters = 0;
  double residual_norm = 0.0;
};

struct FomSolution {
  Dense states;  // n_dofs x total steps
  std::vector<StepLog> log;
};

FomSolution solve_fom(const FomProblem& p, const ParamPoint& mu, const Schedule& schedule,
                      const NewtonOptions& opt = {});
FomSolution solve_fom(const FomProblem& p, const ParamPoint& mu);

void write_step_log(const std::filesystem::path& path, const std::vector<StepLog>& log);

/// Area-weighted mean temperature functional: mean = w . d.
Vector mean_temperature_weights(const FomProblem& p);

struct SnapshotSet {
  std::vector<ParamPoint> params;
  Index steps_per_param = 0;
  BlockedMatrix snapshots;  // n_dofs x (m * steps), column block i holds mu_i
};

/// One FOM task per parameter on the executor, written into a matrix
/// allocated up front. Failures are rethrown with the offending parameter.
SnapshotSet generate_snapshots(const FomProblem& p, const std::vector<ParamPoint>& params,
                               const Schedule& schedule, BlockShape shape, int workers);

/// POD-RBF surrogate for nodal fields over parameter space: training fields
/// (columns) are compressed by POD, their coefficients interpolated with
/// thin-plate splines plus a linear polynomial, then reconstructed.
Dense pod_rbf_interpolate(const Dense& training_fields, const std::vector<std::vector<double>>& training_params,
                          const std::vector<double>& query, double pod_tol = 1e-12);

}  // namespace romflow
