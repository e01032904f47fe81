#pragma once

// Empirical cubature: choose a small subset of elements with positive weights
// that reproduces the weighted sums of a set of element-wise modes.
//
// Given G (rows = elements, columns = modes) and reference weights w0, the
// augmented matrix is Ghat = [G, c 1] with c = ||G||_F / sqrt(rows); the
// extra column makes the rule preserve the total weight. A rule (E, w) has
// integration error ||Ghat_E^T w - b|| / ||b|| with b = Ghat^T w0.

#include "romflow/blocks.hpp"
#include "romflow/svd.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace romflow {

struct CubatureRule {
  std::vector<Index> elements;  // strictly increasing
  std::vector<double> weights;  // positive
  double achieved_error = 0.0;
  double tolerance = 0.0;

  Index size() const noexcept { return static_cast<Index>(elements.size()); }
};

/// Every element with unit weight.
CubatureRule full_rule(Index n_elements);

// ---------------------------------------------------------------------------
// Nonnegative least squares (Lawson-Hanson active set).

struct NnlsResult {
  Vector x;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// min ||A x - b|| subject to x >= 0.
NnlsResult nnls(const Dense& a, const Vector& b, int max_iterations = 0);

// ---------------------------------------------------------------------------
// Monolithic ECM

struct EcmOptions {
  /// Rows whose norm is below this fraction of the largest row norm are never
  /// selected; they carry no information and their normalized scores are noise.
  double candidate_floor = 1e-6;
  int max_iterations = 0;  // 0 selects 5 * rows
};

struct EcmStats {
  int iterations = 0;
};

class EcmFailure : public std::runtime_error {
 public:
  EcmFailure(const std::string& what, CubatureRule best) : std::runtime_error(what), best_(std::move(best)) {}
  const CubatureRule& best() const noexcept { return best_; }
  double best_error() const noexcept { return best_.achieved_error; }

 private:
  CubatureRule best_;
};

/// Greedy selection plus NNLS reweighting until the integration error is at
/// most tol. Candidates are scored by Ghat_e . residual / ||Ghat_e||; ties
/// go to the lowest index. Elements whose weight drops to zero are evicted;
/// one that receives zero weight right after being added is never tried again.
/// initial_weights defaults to all ones.
CubatureRule ecm(const Dense& g, const Vector* initial_weights, double tol, const EcmOptions& opt = {},
                 EcmStats* stats = nullptr);

/// Integration error of a rule against G (augmented as above).
double integration_error(const Dense& g, const CubatureRule& rule, const Vector* reference_weights = nullptr);
/// Same test evaluated on a blocked matrix such as S_r itself.
double integration_error(const BlockedMatrix& s, const CubatureRule& rule, const Vector* reference_weights = nullptr);

// ---------------------------------------------------------------------------
// Partitioned ECM

struct ElementRange {
  Index begin = 0;
  Index end = 0;  // exclusive
  Index size() const noexcept { return end - begin; }
};

struct PartitionPlan {
  Index partition_size = 0;  // max rows per partition
  int n_recursions = 1;
  std::vector<ElementRange> partitions;

  /// Contiguous partitions of at most partition_size rows.
  static PartitionPlan by_size(Index n_elements, Index partition_size, int n_recursions);
  /// `count` contiguous partitions of near-equal size.
  static PartitionPlan by_count(Index n_elements, Index count, int n_recursions);
  /// Throws std::invalid_argument unless the partitions are disjoint,
  /// ordered, cover [0, n_elements) and respect partition_size.
  void validate(Index n_elements) const;
};

struct LocalToGlobal {
  std::vector<Index> indices;
  std::vector<double> weights;
};

/// global = range.begin + local; weights unchanged. Throws IndexError for a
/// local index outside the range.
LocalToGlobal local_to_global(const std::vector<Index>& local_indices, const std::vector<double>& local_weights,
                              ElementRange range);

struct PartitionRecord {
  Index rows = 0;
  Index cols = 0;
  Index basis_rank = 0;
  Index selected = 0;
  int ecm_iterations = 0;
  double svd_cost = 0.0;  // rows * cols * rank
  double ecm_cost = 0.0;  // iterations * rank * rows
};

struct LevelRecord {
  int level = 0;
  Index candidates_in = 0;
  Index survivors = 0;
  std::vector<PartitionRecord> partitions;
  double svd_cost = 0.0;
  double ecm_cost = 0.0;
};

struct PartitionedEcmResult {
  CubatureRule rule;
  std::vector<LevelRecord> levels;  // includes the final single-partition pass
  double total_svd_cost = 0.0;
  double total_ecm_cost = 0.0;

  double total_cost() const noexcept { return total_svd_cost + total_ecm_cost; }
  /// Partition count per level, e.g. "6 -> 3 -> 2 -> 1".
  std::string level_pattern() const;
};

/// Recursive SVD + ECM over row partitions of S_r. Each partition is
/// weighted by the weights its rows carry from the previous level, reduced
/// to a residual basis with svd, and passed to ECM with those weights as
/// reference; survivors keep absolute weights. Levels repeat on the union of
/// survivors until it fits one partition, n_recursions is reached, or a level
/// does not shrink the candidate set; a last single-partition pass then
/// produces the rule. If S_r already fits one partition this is plain
/// monolithic SVD + ECM.
PartitionedEcmResult partitioned_ecm(const BlockedMatrix& s_r, const PartitionPlan& plan, const SvdSettings& svd,
                                     double eps_res, int workers = 1, const EcmOptions& opt = {});

/// Monolithic path: residual basis of all of S_r, then ECM.
PartitionedEcmResult monolithic_ecm(const BlockedMatrix& s_r, const SvdSettings& svd, double eps_res,
                                    const EcmOptions& opt = {});

// ---------------------------------------------------------------------------
// Persistence: "count achieved_error tolerance" header, then one
// "element_index weight" line per element, 17 significant digits.

void save_rule(const std::filesystem::path& path, const CubatureRule& rule);
CubatureRule load_rule(const std::filesystem::path& path);

}  // namespace romflow
