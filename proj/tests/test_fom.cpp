#include "romflow/fom.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace romflow;

namespace {

// Pure diffusion, zero velocity, given nodal source.
FomProblem diffusion_problem(Index n, double diffusivity, std::vector<double> source, double dt) {
  Mesh mesh = Mesh::unit_square(n);
  std::vector<Point> vel(mesh.nodes.size(), Point::Zero());
  return FomProblem(std::move(mesh), std::move(vel), std::move(source), diffusivity, 0.0, 1, dt, 1.0);
}

FomProblem small_problem(double kappa, Index n = 6, Index steps = 5) {
  ProblemSpec spec;
  spec.mesh_n = n;
  spec.reaction_cubic = kappa;
  spec.time_steps = steps;
  return FomProblem::desk(spec);
}

Vector random_vector(Index n, unsigned seed) { return testing::random_dense(n, 1, seed).col(0); }

}  // namespace

TEST_CASE("unit square mesh sizes") {
  const Mesh m = Mesh::unit_square(32);
  CHECK(m.n_elements() == 2048);
  CHECK(m.n_dofs == 961);
  CHECK(m.nodes.size() == 33u * 33u);
  CHECK_THROWS_AS(Mesh::unit_square(0), std::invalid_argument);
}

TEST_CASE("mesh validation") {
  std::vector<Point> nodes{{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(Mesh::from_parts(nodes, {{0, 1, 3}}, {}), IndexError);
  CHECK_THROWS_AS(Mesh::from_parts(nodes, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(Mesh::from_parts({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, {}), std::invalid_argument);
  const Mesh cw = Mesh::from_parts(nodes, {{0, 2, 1}}, {});
  const auto& el = cw.elements[0];
  const Point a = cw.nodes[static_cast<std::size_t>(el[0])];
  const Point b = cw.nodes[static_cast<std::size_t>(el[1])];
  const Point c = cw.nodes[static_cast<std::size_t>(el[2])];
  CHECK((b - a).x() * (c - a).y() - (c - a).x() * (b - a).y() > 0.0);
}

TEST_CASE("problem validation") {
  Mesh m = Mesh::unit_square(2);
  const std::vector<Point> v(m.nodes.size(), Point::Zero());
  const std::vector<double> s(m.nodes.size(), 1.0);
  CHECK_THROWS_AS(FomProblem(m, v, s, 1.0, 0.0, 1, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FomProblem(m, v, s, 0.0, 0.0, 1, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FomProblem(m, v, s, 1.0, -1.0, 1, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FomProblem(m, v, s, 1.0, 0.0, 1, 0.1, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(FomProblem(m, {}, s, 1.0, 0.0, 1, 0.1, 1.0), ShapeError);
}

TEST_CASE("single element residual matches hand assembly") {
  const Mesh mesh = Mesh::from_parts({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {});
  const double diff = 0.7;
  const double dt = 0.5;
  const FomProblem p(mesh, std::vector<Point>(3, Point::Zero()), std::vector<double>(3, 2.0), diff, 0.0, 1, dt, 1.0);
  Matrix3 k;
  k << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  k *= diff / 2.0;
  Matrix3 m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  m /= 24.0;
  const Vector3 d(0.3, -1.2, 0.8);
  const Vector3 dp(0.1, 0.4, -0.5);
  const double q = 1.5;
  const Vector3 expect = m * (d - dp) / dt + k * d - q * m * Vector3::Constant(2.0);
  const Vector3 got = element_residual(p, 0, d, dp, Forcing{q, 1.0});
  CHECK((got - expect).norm() <= 1e-15 * expect.norm() + 1e-15);
  CHECK_THROWS_AS(element_residual(p, 1, d, dp, Forcing{}), IndexError);
  CHECK_THROWS_AS(element_jacobian(p, -1, d, Forcing{}), IndexError);
}

TEST_CASE("zero state with zero forcing has zero residual") {
  const FomProblem p = small_problem(0.0);
  const Vector z = Vector::Zero(p.n_dofs());
  CHECK(residual(p, z, z, Forcing{0.0, 1.0}).norm() == 0.0);
  CHECK_THROWS_AS(residual(p, Vector::Zero(3), z, Forcing{}), ShapeError);
}

TEST_CASE("global residual is the scatter sum of element residuals") {
  const Mesh mesh = Mesh::from_parts({{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}},
                                     {{0, 1, 4}, {0, 4, 3}, {1, 2, 5}, {1, 5, 4}}, {0, 3});
  std::vector<Point> vel{{1, 0}, {0.5, 0.2}, {0, 1}, {-1, 0}, {0.3, 0.3}, {0, -1}};
  const FomProblem p(mesh, vel, {1, 2, 3, 4, 5, 6}, 0.3, 0.8, 1, 0.2, 0.6);
  const Vector d = random_vector(p.n_dofs(), 1);
  const Vector dp = random_vector(p.n_dofs(), 2);
  const Forcing f{1.3, 0.7};
  Vector sum = Vector::Zero(p.n_dofs());
  for (Index e = 0; e < p.n_elements(); ++e) {
    const Vector3 re = element_residual(p, e, gather(p, e, d), gather(p, e, dp), f);
    const auto dofs = mesh.element_dofs(e);
    for (int i = 0; i < 3; ++i) {
      if (dofs[static_cast<std::size_t>(i)] >= 0) sum(dofs[static_cast<std::size_t>(i)]) += re(i);
    }
  }
  CHECK((residual(p, d, dp, f) - sum).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("element and global Jacobians match central differences") {
  const FomProblem p = small_problem(2.0, 4);
  const Forcing f{1.0, 1.2};
  const double h = 1e-6;
  for (Index e : {Index{0}, Index{7}, Index{13}}) {
    // Constrained entries stay zero, as they do when gathered from a state.
    const auto dofs = p.mesh().element_dofs(e);
    Vector3 de = random_vector(3, static_cast<unsigned>(10 + e));
    Vector3 dpe = random_vector(3, static_cast<unsigned>(20 + e));
    for (int k = 0; k < 3; ++k) {
      if (dofs[static_cast<std::size_t>(k)] < 0) de(k) = dpe(k) = 0.0;
    }
    const Matrix3 j = element_jacobian(p, e, de, f);
    Matrix3 fd = Matrix3::Zero();
    for (int k = 0; k < 3; ++k) {
      if (dofs[static_cast<std::size_t>(k)] < 0) continue;
      Vector3 up = de, dn = de;
      up(k) += h;
      dn(k) -= h;
      fd.col(k) = (element_residual(p, e, up, dpe, f) - element_residual(p, e, dn, dpe, f)) / (2 * h);
    }
    CHECK((j - fd).norm() <= 1e-6 * std::max(1.0, j.norm()));
  }
  const Vector d = random_vector(p.n_dofs(), 3);
  const Vector dp = random_vector(p.n_dofs(), 4);
  const Dense jg = Dense(jacobian(p, d, f));
  Dense fd(p.n_dofs(), p.n_dofs());
  for (Index k = 0; k < p.n_dofs(); ++k) {
    Vector up = d, dn = d;
    up(k) += h;
    dn(k) -= h;
    fd.col(k) = (residual(p, up, dp, f) - residual(p, dn, dp, f)) / (2 * h);
  }
  CHECK((jg - fd).norm() <= 1e-6 * jg.norm());
}

TEST_CASE("linear element Jacobian does not depend on the state") {
  const FomProblem p = small_problem(0.0);
  const Forcing f{1.0, 1.0};
  const Matrix3 a = element_jacobian(p, 3, Vector3(1, 2, 3), f);
  const Matrix3 b = element_jacobian(p, 3, Vector3(-5, 0.1, 9), f);
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("manufactured steady solution converges at second order") {
  // u = x(1-x)y(1-y), -D lap u = 2D(x(1-x) + y(1-y)).
  const double diff = 1.0;
  std::vector<double> errors;
  for (Index n : {Index{8}, Index{16}, Index{32}}) {
    const Mesh mesh = Mesh::unit_square(n);
    std::vector<double> src;
    for (const Point& x : mesh.nodes) {
      src.push_back(2.0 * diff * (x.x() * (1 - x.x()) + x.y() * (1 - x.y())));
    }
    const FomProblem p = diffusion_problem(n, diff, src, 1e12);
    const FomSolution sol = solve_fom(p, ParamPoint{1.0, 0.0});
    const Vector d = sol.states.col(0);

    Vector load = Vector::Zero(p.n_dofs());
    for (Index e = 0; e < p.n_elements(); ++e) {
      const auto dofs = p.mesh().element_dofs(e);
      for (int i = 0; i < 3; ++i) {
        if (dofs[static_cast<std::size_t>(i)] >= 0) load(dofs[static_cast<std::size_t>(i)]) += p.element(e).load(i);
      }
    }
    CHECK(residual(p, d, d, Forcing{1.0, 0.0}).norm() <= 1e-10 * load.norm());

    double err2 = 0.0;
    for (Index e = 0; e < p.n_elements(); ++e) {
      Vector3 ex;
      const auto& el = p.mesh().elements[static_cast<std::size_t>(e)];
      for (int i = 0; i < 3; ++i) {
        const Point& x = p.mesh().nodes[static_cast<std::size_t>(el[static_cast<std::size_t>(i)])];
        ex(i) = x.x() * (1 - x.x()) * x.y() * (1 - x.y());
      }
      const Vector3 diffv = gather(p, e, d) - ex;
      err2 += diffv.dot(p.element(e).mass * diffv);
    }
    errors.push_back(std::sqrt(err2));
  }
  CHECK(errors[0] / errors[1] >= 3.5);
  CHECK(errors[1] / errors[2] >= 3.5);
}

TEST_CASE("zero source gives zero states") {
  const FomProblem p = small_problem(0.5);
  const FomSolution sol = solve_fom(p, ParamPoint{0.0, 1.0});
  CHECK(sol.states.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& l : sol.log) CHECK(l.newton_iters == 0);
}

TEST_CASE("linear problem: one Newton iteration per step and linearity in the source") {
  const FomProblem p = small_problem(0.0, 8, 6);
  const FomSolution one = solve_fom(p, ParamPoint{1.0, 1.0});
  const FomSolution three = solve_fom(p, ParamPoint{3.0, 1.0});
  for (const auto& l : one.log) CHECK(l.newton_iters == 1);
  CHECK(testing::rel_diff(three.states, 3.0 * one.states) <= 1e-10);
  CHECK(one.states.cols() == 6);
}

TEST_CASE("nonlinear problem iterates and reports non-convergence") {
  const FomProblem p = small_problem(50.0, 6, 3);
  const FomSolution sol = solve_fom(p, ParamPoint{40.0, 1.0});
  CHECK(sol.log[0].newton_iters > 1);
  NewtonOptions tight;
  tight.max_iter = 1;
  try {
    solve_fom(p, ParamPoint{40.0, 1.0}, constant_schedule(3), tight);
    FAIL("expected NewtonError");
  } catch (const NewtonError& e) {
    CHECK(e.step() == 0);
    CHECK(e.iterations() == 1);
    CHECK(e.residual_norm() > 0.0);
  }
}

TEST_CASE("heat-up then cool-down: mean temperature rises then decays") {
  const FomProblem p = small_problem(0.0, 8);
  const Schedule sched{{10, 1.0, 1.0}, {10, 0.0, 0.0}};
  const FomSolution sol = solve_fom(p, ParamPoint{1.0, 1.0}, sched);
  const Vector w = mean_temperature_weights(p);
  for (Index s = 1; s < 20; ++s) {
    const double delta = w.dot(sol.states.col(s)) - w.dot(sol.states.col(s - 1));
    if (s < 10) {
      CHECK(delta > 0.0);
    } else {
      CHECK(delta < 0.0);
    }
  }
}

TEST_CASE("snapshot layout, permutation and serial agreement") {
  const FomProblem p = small_problem(0.0, 6, 4);
  const std::vector<ParamPoint> params{{0.5, 0.5}, {1.0, 1.5}, {1.5, 1.0}};
  const SnapshotSet s4 = generate_snapshots(p, params, constant_schedule(4), BlockShape(10, 5), 4);
  const SnapshotSet s1 = generate_snapshots(p, params, constant_schedule(4), BlockShape(10, 5), 1);
  CHECK(s4.snapshots.cols() == 12);
  CHECK(s4.snapshots.rows() == p.n_dofs());
  const Dense d4 = s4.snapshots.to_dense();
  CHECK((d4 - s1.snapshots.to_dense()).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    CHECK((d4.middleCols(static_cast<Index>(i) * 4, 4) - solve_fom(p, params[i]).states).cwiseAbs().maxCoeff() == 0.0);
  }
  const SnapshotSet perm = generate_snapshots(p, {params[2], params[0], params[1]}, constant_schedule(4), BlockShape(10, 5), 2);
  const Dense dp = perm.snapshots.to_dense();
  CHECK(dp.middleCols(0, 4) == d4.middleCols(8, 4));
  CHECK(dp.middleCols(4, 4) == d4.middleCols(0, 4));
  CHECK_THROWS_AS(generate_snapshots(p, {}, constant_schedule(4), BlockShape(10, 5), 1), std::invalid_argument);
}

TEST_CASE("desk training set has 243 snapshot columns") {
  const FomProblem p = FomProblem::desk(ProblemSpec{});
  std::vector<ParamPoint> params;
  for (double q : {0.5, 1.0, 1.5}) {
    for (double v : {0.5, 1.0, 1.5}) params.push_back({q, v});
  }
  const SnapshotSet s = generate_snapshots(p, params, constant_schedule(p.time_steps()), BlockShape(256, 27), 2);
  CHECK(s.snapshots.cols() == 243);
  CHECK(s.snapshots.rows() == 961);
  CHECK(s.snapshots.all_finite());
}

TEST_CASE("snapshot failures name the parameter") {
  const FomProblem p = small_problem(50.0, 6, 2);
  const std::vector<ParamPoint> bad{{1.0, 1.0}, {std::nan(""), 1.0}};
  CHECK_THROWS_WITH_AS(generate_snapshots(p, bad, constant_schedule(2), BlockShape(8, 2), 2),
                       doctest::Contains("q_dot"), NewtonError);
}

TEST_CASE("POD-RBF surrogate") {
  const Index n = 40;
  const Dense a = testing::random_dense(n, 1, 5);
  const Dense b = testing::random_dense(n, 1, 6);
  const Dense c = testing::random_dense(n, 1, 7);
  // Fields linear in mu: f(mu) = a + mu0 b + mu1 c.
  std::vector<std::vector<double>> mus{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.2}};
  Dense fields(n, static_cast<Index>(mus.size()));
  for (std::size_t i = 0; i < mus.size(); ++i) fields.col(static_cast<Index>(i)) = a + mus[i][0] * b + mus[i][1] * c;

  for (std::size_t i = 0; i < mus.size(); ++i) {
    const Dense out = pod_rbf_interpolate(fields, mus, mus[i]);
    CHECK(testing::rel_diff(out, fields.col(static_cast<Index>(i))) <= 1e-9);
  }
  const Dense mid = pod_rbf_interpolate(fields, mus, {0.5, 0.5});
  CHECK(testing::rel_diff(mid, 0.5 * (fields.col(0) + fields.col(3))) <= 1e-8);

  Dense parallel(n, 3);
  for (Index j = 0; j < 3; ++j) parallel.col(j) = (1.0 + static_cast<double>(j)) * a;
  const Dense par = pod_rbf_interpolate(parallel, {{0}, {1}, {2}}, {1.3});
  const double cosang = std::abs(par.col(0).dot(a.col(0))) / (par.norm() * a.norm());
  CHECK(cosang == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(pod_rbf_interpolate(fields.leftCols(2), {{0, 0}, {0, 0}}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(pod_rbf_interpolate(fields.leftCols(1), {{0, 0}}, {0.5, 0.5}), std::invalid_argument);
}
