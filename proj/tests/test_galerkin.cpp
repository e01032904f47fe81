#include "romflow/galerkin.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <numeric>

using namespace romflow;

namespace {

FomProblem small_problem(double kappa = 0.0, Index n = 8, Index steps = 10) {
  ProblemSpec spec;
  spec.mesh_n = n;
  spec.reaction_cubic = kappa;
  spec.time_steps = steps;
  return FomProblem::desk(spec);
}

std::vector<ParamPoint> grid_params() {
  std::vector<ParamPoint> out;
  for (double q : {0.5, 1.0, 1.5}) {
    for (double v : {0.5, 1.0, 1.5}) out.push_back({q, v});
  }
  return out;
}

Basis pod_basis(const FomProblem& p, const std::vector<ParamPoint>& params, double eps) {
  const SnapshotSet s = generate_snapshots(p, params, constant_schedule(p.time_steps()), BlockShape(16, 8), 2);
  return full_svd(s.snapshots, TruncationSpec::tolerance(eps));
}

Basis lossless_basis(Index n) {
  const Dense q = testing::random_dense(n, n, 11).householderQr().householderQ();
  Basis b;
  b.vectors = BlockedMatrix::from_dense(q, BlockShape(16, 16));
  b.singular_values.assign(static_cast<std::size_t>(n), 1.0);
  return b;
}

Dense all_rows_sum(const Dense& per_element) { return per_element.colwise().sum(); }

}  // namespace

TEST_CASE("reduced model gathers element rows of the basis") {
  const FomProblem p = small_problem();
  const Basis b = lossless_basis(p.n_dofs());
  const ReducedModel m(p, b);
  CHECK(m.n_modes() == p.n_dofs());
  for (Index e : {Index{0}, Index{50}}) {
    const auto dofs = p.mesh().element_dofs(e);
    for (int a = 0; a < 3; ++a) {
      const Index d = dofs[static_cast<std::size_t>(a)];
      if (d < 0) {
        CHECK(m.phi_e(e).row(a).norm() == 0.0);
      } else {
        CHECK(m.phi_e(e).row(a) == m.phi().row(d));
      }
    }
  }
  Basis wrong;
  wrong.vectors = BlockedMatrix::from_dense(Dense::Ones(5, 2), BlockShape(5, 2));
  CHECK_THROWS_AS(ReducedModel(p, wrong), ShapeError);
}

TEST_CASE("lossless basis reproduces the full model") {
  for (double kappa : {0.0, 3.0}) {
    const FomProblem p = small_problem(kappa);
    const ReducedModel m(p, lossless_basis(p.n_dofs()));
    const ParamPoint mu{1.2, 0.8};
    const FomSolution fom = solve_fom(p, mu);
    const ReducedSolution rom = solve_rom(m, mu, constant_schedule(p.time_steps()));
    CHECK(testing::rel_diff(rom.full_states, fom.states) <= 1e-9);
  }
}

TEST_CASE("truncated basis error stays within 100 eps and shrinks with eps") {
  const FomProblem p = small_problem();
  const auto params = grid_params();
  const ParamPoint mu = params[4];
  const FomSolution fom = solve_fom(p, mu);
  double previous = 1.0;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const Basis b = pod_basis(p, params, eps);
    const ReducedModel m(p, b);
    const ReducedSolution rom = solve_rom(m, mu, constant_schedule(p.time_steps()));
    const double e = testing::rel_diff(rom.full_states, fom.states);
    CHECK(e <= 100 * eps);
    CHECK(e <= previous);
    previous = e;
  }
}

TEST_CASE("recorded projected residuals sum to the converged reduced residual") {
  const FomProblem p = small_problem(2.0);
  const Basis b = pod_basis(p, grid_params(), 1e-3);
  const ReducedModel m(p, b);
  const ParamPoint mu{1.0, 1.0};
  const ReducedSolution rom = solve_rom(m, mu, constant_schedule(p.time_steps()));
  REQUIRE(rom.projected_residuals.size() == static_cast<std::size_t>(p.time_steps()));
  const Forcing f = forcing_for(mu, Phase{});
  for (Index s = 0; s < p.time_steps(); ++s) {
    const Vector d = m.phi() * rom.reduced_states.col(s);
    const Vector dp = s == 0 ? Vector(Vector::Zero(p.n_dofs())) : Vector(m.phi() * rom.reduced_states.col(s - 1));
    const Vector global = m.phi().transpose() * residual(p, d, dp, f);
    const Dense rows = all_rows_sum(rom.projected_residuals[static_cast<std::size_t>(s)]);
    CHECK((rows.transpose() - global).norm() <= 1e-10);
    CHECK(rows.norm() <= 1e-8);
    CHECK(rom.projected_residuals[static_cast<std::size_t>(s)].norm() > 1e-6);
  }
}

TEST_CASE("projected residual collection layout") {
  const FomProblem p = small_problem(0.0, 6, 4);
  const auto params = grid_params();
  const Basis b = pod_basis(p, params, 1e-3);
  const ReducedModel m(p, b);
  const Index n = m.n_modes();
  const ProjectedResidualSet set =
      collect_projected_residuals(m, params, constant_schedule(4), BlockShape(20, 7), BlockShape(16, 5), 3);
  CHECK(set.matrix.rows() == p.n_elements());
  CHECK(set.matrix.cols() == n * 36);
  CHECK(set.n_modes == n);
  CHECK(set.rom_states.cols() == 36);
  const Dense sr = set.matrix.to_dense();
  const ReducedSolution one = solve_rom(m, params[5], constant_schedule(4));
  for (Index s = 0; s < 4; ++s) {
    CHECK(sr.middleCols((5 * 4 + s) * n, n) == one.projected_residuals[static_cast<std::size_t>(s)]);
  }
  CHECK(set.rom_states.to_dense().middleCols(20, 4) == one.full_states);
  const ProjectedResidualSet serial =
      collect_projected_residuals(m, params, constant_schedule(4), BlockShape(20, 7), BlockShape(16, 5), 1);
  CHECK(serial.matrix.to_dense() == sr);
}

TEST_CASE("single element mesh yields a single row") {
  const Mesh mesh = Mesh::from_parts({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {});
  const FomProblem p(mesh, std::vector<Point>(3, Point(1, 0)), std::vector<double>(3, 1.0), 0.5, 0.0, 3, 0.1, 1.0);
  Basis b;
  b.vectors = BlockedMatrix::from_dense(Dense(Vector::Ones(3).normalized()), BlockShape(3, 1));
  b.singular_values = {1.0};
  const ReducedModel m(p, b);
  const ProjectedResidualSet set =
      collect_projected_residuals(m, {{1.0, 1.0}}, constant_schedule(3), BlockShape(1, 2), BlockShape(3, 3), 1);
  CHECK(set.matrix.rows() == 1);
  CHECK(set.matrix.cols() == 3);
  CHECK(set.matrix.to_dense().cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("HROM with the full unit rule equals the ROM") {
  const FomProblem p = small_problem(1.0);
  const Basis b = pod_basis(p, grid_params(), 1e-4);
  const ReducedModel m(p, b);
  const HromModel h{&m, full_rule(p.n_elements())};
  const ParamPoint mu{0.7, 1.3};
  const Schedule sched{{6, 1.0, 1.0}, {4, 0.0, 0.0}};
  const ReducedSolution rom = solve_rom(m, mu, sched);
  const ReducedSolution hrom = solve_hrom(h, mu, sched, HromMode::full_projection);
  CHECK((hrom.reduced_states - rom.reduced_states).cwiseAbs().maxCoeff() <= 1e-12 * rom.reduced_states.norm());
  CHECK(testing::rel_diff(hrom.full_states, rom.full_states) <= 1e-12);
  CHECK(hrom.projected_residuals.empty());
}

TEST_CASE("HROM assembles only the selected elements") {
  const FomProblem p = small_problem(0.0);
  const Basis b = pod_basis(p, grid_params(), 1e-4);
  const ReducedModel m(p, b);
  HromModel h{&m, {}};
  h.rule.elements = {3, 40, 77, 101};
  h.rule.weights = {30.0, 30.0, 30.0, 38.0};
  const ReducedSolution out = solve_hrom(h, ParamPoint{}, constant_schedule(p.time_steps()));
  CHECK(out.element_evaluations == 4 * out.assemblies);
  CHECK(out.full_states.size() == 0);
  CHECK(out.mean_temperature.size() == static_cast<std::size_t>(p.time_steps()));

  const ReducedSolution rom = solve_rom(m, ParamPoint{}, constant_schedule(p.time_steps()));
  CHECK(rom.element_evaluations == static_cast<std::uint64_t>(p.n_elements()) * rom.assemblies);
}

TEST_CASE("HROM with an ECM rule tracks the ROM") {
  const FomProblem p = small_problem(0.0);
  const auto params = grid_params();
  const Basis b = pod_basis(p, params, 1e-4);
  const ReducedModel m(p, b);
  const ProjectedResidualSet set = collect_projected_residuals(m, params, constant_schedule(p.time_steps()),
                                                               BlockShape(32, 64), BlockShape(16, 10), 2);
  SvdSettings svd;
  const PartitionedEcmResult ecm_run = monolithic_ecm(set.matrix, svd, 1e-8);
  const HromModel h{&m, ecm_run.rule};
  CHECK(h.rule.size() < p.n_elements());
  for (std::size_t i : {std::size_t{0}, std::size_t{4}, std::size_t{8}}) {
    const ReducedSolution rom = solve_rom(m, params[i], constant_schedule(p.time_steps()));
    const ReducedSolution hrom = solve_hrom(h, params[i], constant_schedule(p.time_steps()), HromMode::full_projection);
    CHECK(testing::rel_diff(hrom.full_states, rom.full_states) <= 1e-4);
  }
}

TEST_CASE("HROM rule validation") {
  const FomProblem p = small_problem();
  const ReducedModel m(p, lossless_basis(p.n_dofs()));
  HromModel h{&m, {}};
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  h.rule.elements = {1, p.n_elements()};
  h.rule.weights = {1.0, 1.0};
  CHECK_THROWS_AS(h.validate(), IndexError);
  h.rule.elements = {1, 2};
  h.rule.weights = {1.0, 0.0};
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  h.rule.weights = {1.0, 2.0};
  CHECK_NOTHROW(h.validate());
  HromModel none;
  CHECK_THROWS_AS(none.validate(), std::invalid_argument);
}

TEST_CASE("relative error") {
  const Dense a = testing::random_dense(30, 7, 1);
  const Dense b = testing::random_dense(30, 7, 2);
  const auto ba = BlockedMatrix::from_dense(a, BlockShape(8, 3));
  const auto bb = BlockedMatrix::from_dense(b, BlockShape(8, 3));
  CHECK(relative_error(ba, ba) == 0.0);
  CHECK(relative_error(BlockedMatrix::from_dense(1.01 * a, BlockShape(8, 3)), ba) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(relative_error(ba, bb) == doctest::Approx((a - b).norm() / b.norm()).epsilon(1e-13));
  CHECK_THROWS_AS(relative_error(ba, BlockedMatrix::from_dense(b.leftCols(3), BlockShape(8, 3))), ShapeError);
  CHECK_THROWS_AS(relative_error(ba, BlockedMatrix(30, 7, BlockShape(8, 3))), std::invalid_argument);
}
