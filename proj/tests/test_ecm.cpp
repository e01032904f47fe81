#include "romflow/ecm.hpp"

#include "romflow/errors.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

using namespace romflow;

namespace {

// Brute-force NNLS: least squares on every support, keep the best feasible one.
Vector nnls_oracle(const Dense& a, const Vector& b) {
  const Index n = a.cols();
  Vector best = Vector::Zero(n);
  double best_res = b.norm();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j) {
      if (mask & (1u << j)) cols.push_back(j);
    }
    Dense sub(a.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Index>(k)) = a.col(cols[k]);
    const Vector s = sub.colPivHouseholderQr().solve(b);
    if (s.minCoeff() < 0.0) continue;
    Vector x = Vector::Zero(n);
    for (std::size_t k = 0; k < cols.size(); ++k) x(cols[k]) = s(static_cast<Index>(k));
    const double res = (a * x - b).norm();
    if (res < best_res) {
      best_res = res;
      best = x;
    }
  }
  return best;
}

// Dense brute-force integration error with the augmented constant column.
double error_oracle(const Dense& g, const CubatureRule& rule) {
  const Index n = g.rows();
  Dense gh(n, g.cols() + 1);
  gh << g, Vector::Constant(n, g.norm() / std::sqrt(static_cast<double>(n)));
  const Vector b = gh.transpose() * Vector::Ones(n);
  Vector approx = Vector::Zero(gh.cols());
  for (std::size_t k = 0; k < rule.elements.size(); ++k) approx += rule.weights[k] * gh.row(rule.elements[k]).transpose();
  return (approx - b).norm() / b.norm();
}

Dense low_rank(Index rows, Index cols, Index rank, unsigned seed) {
  return testing::random_dense(rows, rank, seed) * testing::random_dense(rank, cols, seed + 1);
}

void check_rule_shape(const CubatureRule& r) {
  REQUIRE(r.elements.size() == r.weights.size());
  for (std::size_t k = 0; k < r.elements.size(); ++k) {
    CHECK(r.weights[k] > 0.0);
    if (k > 0) CHECK(r.elements[k] > r.elements[k - 1]);
  }
}

}  // namespace

TEST_CASE("nnls matches a brute-force support search") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Dense a = testing::random_dense(8, 5, 100 + seed);
    const Vector b = testing::random_dense(8, 1, 200 + seed).col(0);
    const NnlsResult r = nnls(a, b);
    const Vector oracle = nnls_oracle(a, b);
    CHECK(r.x.minCoeff() >= 0.0);
    CHECK((r.x - oracle).norm() <= 1e-10 * std::max(1.0, oracle.norm()));
    CHECK(r.residual_norm == doctest::Approx((a * oracle - b).norm()).epsilon(1e-10));
  }
  const Dense a = testing::random_dense(6, 3, 9);
  const Vector x(Eigen::Vector3d(1.0, 2.0, 0.5));
  CHECK((nnls(a, a * x).x - x).norm() <= 1e-12);
  CHECK_THROWS_AS(nnls(a, Vector::Ones(5)), std::invalid_argument);
}

TEST_CASE("constant column is integrated by a single element of weight N_el") {
  const Dense g = Dense::Ones(10, 1);
  const CubatureRule r = ecm(g, nullptr, 1e-12);
  REQUIRE(r.size() == 1);
  CHECK(r.weights[0] == doctest::Approx(10.0).epsilon(1e-14));
  // Every single-element rule with weight 10 is exact, so any choice is valid.
  for (Index e = 0; e < 10; ++e) CHECK(error_oracle(g, CubatureRule{{e}, {10.0}, 0, 0}) <= 1e-15);
}

TEST_CASE("indicator columns need every element with unit weight") {
  const Index n = 7;
  const CubatureRule r = ecm(Dense::Identity(n, n), nullptr, 1e-12);
  REQUIRE(r.size() == n);
  for (Index e = 0; e < n; ++e) {
    CHECK(r.elements[static_cast<std::size_t>(e)] == e);
    CHECK(r.weights[static_cast<std::size_t>(e)] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("ECM on random orthonormal bases: positivity, sparsity, tolerance") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Index n_el = 300;
    const Index r_g = 3 + static_cast<Index>(seed);
    const Dense g = testing::random_dense(n_el, r_g, 400 + seed).householderQr().householderQ() * Dense::Identity(n_el, r_g);
    const double tol = 1e-10;
    EcmStats stats;
    const CubatureRule r = ecm(g, nullptr, tol, {}, &stats);
    check_rule_shape(r);
    CHECK(r.size() <= 2 * (r_g + 1));
    CHECK(r.achieved_error <= tol);
    CHECK(r.tolerance == tol);
    CHECK(error_oracle(g, r) <= tol);
    CHECK(integration_error(g, r) == doctest::Approx(error_oracle(g, r)).epsilon(1e-6));
    CHECK(stats.iterations >= r.size());
  }
}

TEST_CASE("ECM honours reference weights") {
  const Dense g = testing::random_dense(60, 4, 77);
  Vector w0(60);
  for (Index i = 0; i < 60; ++i) w0(i) = 0.5 + 0.01 * static_cast<double>(i);
  const CubatureRule r = ecm(g, &w0, 1e-10);
  check_rule_shape(r);
  CHECK(integration_error(g, r, &w0) <= 1e-10);
  CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(w0.sum()).epsilon(1e-8));
}

TEST_CASE("unreachable tolerance reports the best rule") {
  Dense g = Dense::Zero(4, 2);
  g(0, 0) = 1.0;
  g(1, 0) = 1.0;
  g(2, 0) = 1.0;
  g(3, 1) = 1e-9;  // below the candidate floor, so mode 1 cannot be integrated
  try {
    ecm(g, nullptr, 1e-14);
    FAIL("expected EcmFailure");
  } catch (const EcmFailure& e) {
    CHECK(e.best_error() > 1e-14);
    CHECK(e.best_error() < 1.0);
    check_rule_shape(e.best());
  }
  CHECK_THROWS_AS(ecm(Dense(0, 2), nullptr, 1e-8), std::invalid_argument);
}

TEST_CASE("integration error") {
  const Dense g = testing::random_dense(50, 5, 3);
  CHECK(integration_error(g, full_rule(50)) <= 1e-15);
  const CubatureRule random_rule{{2, 9, 31, 44}, {3.0, 10.0, 7.5, 20.0}, 0, 0};
  CHECK(integration_error(g, random_rule) == doctest::Approx(error_oracle(g, random_rule)).epsilon(1e-12));
  const BlockedMatrix gb = BlockedMatrix::from_dense(g, BlockShape(7, 2));
  CHECK(integration_error(gb, random_rule) == doctest::Approx(error_oracle(g, random_rule)).epsilon(1e-12));
  CHECK(integration_error(gb, full_rule(50)) <= 1e-14);
  CHECK_THROWS_AS(integration_error(g, CubatureRule{{50}, {1.0}, 0, 0}), IndexError);
}

TEST_CASE("local to global mapping") {
  const auto id = local_to_global({0, 4}, {1.0, 2.0}, {0, 10});
  CHECK(id.indices == std::vector<Index>{0, 4});
  const auto shifted = local_to_global({3, 17}, {0.5, 0.25}, {100, 200});
  CHECK(shifted.indices == std::vector<Index>{103, 117});
  CHECK(shifted.weights == std::vector<double>{0.5, 0.25});
  CHECK_THROWS_AS(local_to_global({100}, {1.0}, {100, 200}), IndexError);
  CHECK_THROWS_AS(local_to_global({1}, {}, {0, 5}), std::invalid_argument);

  // Round trip against a recorded partition table.
  const PartitionPlan plan = PartitionPlan::by_count(997, 7, 1);
  std::vector<Index> locals{0, 5, 11};
  for (const auto& range : plan.partitions) {
    const auto g = local_to_global(locals, {1, 1, 1}, range);
    for (std::size_t k = 0; k < locals.size(); ++k) {
      CHECK(g.indices[k] - range.begin == locals[k]);
      CHECK(g.indices[k] < range.end);
    }
  }
}

TEST_CASE("partition plans") {
  const PartitionPlan s = PartitionPlan::by_size(105, 20, 2);
  CHECK(s.partitions.size() == 6);
  CHECK(s.partitions.back().begin == 100);
  CHECK(s.partitions.back().end == 105);
  const PartitionPlan c = PartitionPlan::by_count(200, 4, 2);
  CHECK(c.partition_size == 50);
  CHECK(c.partitions[2].begin == 100);
  PartitionPlan gap = c;
  gap.partitions[1].end -= 1;
  CHECK_THROWS_AS(gap.validate(200), std::invalid_argument);
  CHECK_THROWS_AS(c.validate(201), std::invalid_argument);
  PartitionPlan big = c;
  big.partition_size = 10;
  CHECK_THROWS_AS(big.validate(200), std::invalid_argument);
  CHECK_THROWS_AS(PartitionPlan::by_count(5, 6, 1), std::invalid_argument);
  CHECK_THROWS_AS(PartitionPlan::by_size(5, 2, 0), std::invalid_argument);
}

TEST_CASE("partitioned ECM on synthetic rank-6 data") {
  const Dense s = low_rank(200, 60, 6, 31);
  const BlockedMatrix sb = BlockedMatrix::from_dense(s, BlockShape(50, 16));
  const double eps = 1e-8;
  SvdSettings svd;
  const PartitionedEcmResult part = partitioned_ecm(sb, PartitionPlan::by_count(200, 4, 2), svd, eps, 2);
  check_rule_shape(part.rule);
  CHECK(part.levels.size() >= 2);
  CHECK(part.levels.front().partitions.size() == 4);
  CHECK(part.levels.back().partitions.size() == 1);

  // Brute-force check against the original totals and against the monolithic integral.
  CHECK(error_oracle(s, part.rule) <= eps);
  CHECK(part.rule.achieved_error == doctest::Approx(error_oracle(s, part.rule)).epsilon(1e-6));
  const PartitionedEcmResult mono = monolithic_ecm(sb, svd, eps);
  CHECK(error_oracle(s, mono.rule) <= eps);
  const Vector exact = s.transpose() * Vector::Ones(200);
  Vector approx = Vector::Zero(60);
  for (std::size_t k = 0; k < part.rule.elements.size(); ++k) approx += part.rule.weights[k] * s.row(part.rule.elements[k]).transpose();
  CHECK((approx - exact).norm() <= eps * exact.norm() * 10);

  for (std::size_t l = 1; l < part.levels.size(); ++l) {
    CHECK(part.levels[l].candidates_in <= part.levels[l - 1].candidates_in);
    CHECK(part.levels[l].candidates_in == part.levels[l - 1].survivors);
  }
  double svd_sum = 0.0, ecm_sum = 0.0;
  for (const auto& l : part.levels) {
    svd_sum += l.svd_cost;
    ecm_sum += l.ecm_cost;
  }
  CHECK(svd_sum == part.total_svd_cost);
  CHECK(ecm_sum == part.total_ecm_cost);
  CHECK(part.total_cost() == part.total_svd_cost + part.total_ecm_cost);
  CHECK(part.levels.front().partitions.front().rows == 50);
}

TEST_CASE("a single all-covering partition is the monolithic rule") {
  const BlockedMatrix sb = BlockedMatrix::from_dense(low_rank(150, 40, 5, 8), BlockShape(32, 8));
  SvdSettings svd;
  const PartitionedEcmResult one = partitioned_ecm(sb, PartitionPlan::by_count(150, 1, 3), svd, 1e-8, 3);
  const PartitionedEcmResult mono = monolithic_ecm(sb, svd, 1e-8);
  CHECK(one.rule.elements == mono.rule.elements);
  CHECK(one.rule.weights == mono.rule.weights);
  CHECK(one.level_pattern() == "1");
}

TEST_CASE("six partitions over three levels reduce to one") {
  const BlockedMatrix sb = BlockedMatrix::from_dense(low_rank(120, 30, 6, 55), BlockShape(20, 10));
  SvdSettings svd;
  const PartitionedEcmResult r = partitioned_ecm(sb, PartitionPlan::by_size(120, 20, 3), svd, 1e-8, 3);
  MESSAGE("level pattern: " << r.level_pattern());
  CHECK(r.level_pattern() == "6 -> 3 -> 2 -> 1");
  CHECK(r.rule.achieved_error <= 1e-8);
  for (std::size_t l = 1; l < r.levels.size(); ++l) {
    CHECK(r.levels[l].partitions.size() < r.levels[l - 1].partitions.size());
  }
}

TEST_CASE("partitioned ECM is independent of the worker count") {
  const BlockedMatrix sb = BlockedMatrix::from_dense(low_rank(200, 50, 6, 90), BlockShape(25, 10));
  SvdSettings svd;
  const auto plan = PartitionPlan::by_count(200, 4, 3);
  const auto a = partitioned_ecm(sb, plan, svd, 1e-8, 1);
  const auto b = partitioned_ecm(sb, plan, svd, 1e-8, 4);
  CHECK(a.rule.elements == b.rule.elements);
  CHECK(a.rule.weights == b.rule.weights);
}

TEST_CASE("rule persistence") {
  const auto dir = std::filesystem::temp_directory_path() / "romflow_test_ecm";
  std::filesystem::create_directories(dir);
  const CubatureRule r{{3, 8, 12}, {0.1 + 0.2, 1.0 / 3.0, 12345.678901234567}, 3.2e-9, 1e-8};
  save_rule(dir / "rule.txt", r);
  const CubatureRule back = load_rule(dir / "rule.txt");
  CHECK(back.elements == r.elements);
  CHECK(back.weights == r.weights);
  CHECK(back.achieved_error == r.achieved_error);
  CHECK(back.tolerance == r.tolerance);

  std::ofstream(dir / "short.txt") << "3 0 1e-8\n1 2.0\n";
  CHECK_THROWS_AS(load_rule(dir / "short.txt"), IoError);
  std::ofstream(dir / "bad.txt") << "two 0 0\n";
  CHECK_THROWS_AS(load_rule(dir / "bad.txt"), IoError);
  CHECK_THROWS_AS(load_rule(dir / "missing.txt"), IoError);
  std::filesystem::remove_all(dir);
}
