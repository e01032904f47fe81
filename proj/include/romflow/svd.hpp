#pragma once

// Truncated SVD of blocked matrices: full SVD through TSQR, randomized SVD,
// and block Lanczos SVD. Each runs in tolerance mode (smallest basis with
// ||(I - U U^T) A||_F <= eps ||A||_F) or fixed-rank mode.
//
// Conventions shared by all three:
//   * at least one vector is always retained;
//   * each basis column is flipped so its largest-magnitude entry is positive
//     (first such entry on ties);
//   * achieved_error is measured directly with blocked kernels, not inferred
//     from singular values.

#include "romflow/blocks.hpp"
#include "romflow/cancellation.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace romflow {

struct TruncationSpec {
  enum class Mode { tolerance, fixed_rank };

  Mode mode = Mode::tolerance;
  double epsilon = 1e-6;
  Index rank = 0;

  static TruncationSpec tolerance(double eps);
  static TruncationSpec fixed_rank(Index rank);
};

/// Smallest N >= 1 with sum_{i>N} sigma_i^2 + floor_sq <= eps^2 * total_sq.
/// Returns sigma.size() + 1 when even the full set misses the bound.
Index tolerance_rank(std::span<const double> sigma, double eps, double total_sq, double floor_sq = 0.0);

struct Basis {
  BlockedMatrix vectors;               // n x N, orthonormal columns
  std::vector<double> singular_values;  // nonincreasing
  TruncationSpec truncation;
  double achieved_error = 0.0;

  Index size() const noexcept { return vectors.cols(); }
};

/// ||(I - U U^T) A||_F / ||A||_F with blocked kernels.
double projection_error(const BlockedMatrix& u, const BlockedMatrix& a);
/// ||U^T U - I||_F.
double orthonormality_defect(const BlockedMatrix& u);
/// Flips columns so each column's largest-magnitude entry is positive.
BlockedMatrix normalize_column_signs(const BlockedMatrix& u);

// ---------------------------------------------------------------------------
// TSQR

struct TsqrResult {
  BlockedMatrix q;  // m x n, orthonormal columns, A's block shape
  Dense r;          // n x n upper triangular, nonnegative diagonal
};

/// Tall-skinny QR. Consecutive block-rows are merged until every panel has at
/// least as many rows as A has columns; each panel is factored, then the R
/// factors are stacked by pairs and refactored until one R remains. Q is the
/// product of the per-level block-diagonal Q factors, applied top-down.
/// Throws std::invalid_argument for wide input.
TsqrResult tsqr(const BlockedMatrix& a);

/// Orthonormal columns spanning the part of y orthogonal to q (two rounds of
/// block Gram-Schmidt, then TSQR). Columns that collapse below
/// drop_tol * ||y_j|| are dropped; the result may have fewer columns than y
/// and is empty (0 columns, returned as a default BlockedMatrix) if all collapse.
BlockedMatrix orthonormalize_against(const BlockedMatrix* q, const BlockedMatrix& y, double drop_tol = 1e-10);

// ---------------------------------------------------------------------------
// Algorithms

/// Full SVD through TSQR followed by a dense SVD of R. Wide input is handled
/// by factoring A^T; the left vectors then come from the small dense SVD.
Basis full_svd(const BlockedMatrix& a, const TruncationSpec& trunc);

struct RandomizedOptions {
  Index oversampling = 8;  // fixed-rank mode: extra sampled columns
  Index power_iters = 1;
  Index growth_step = 8;   // tolerance mode: columns added per round
  std::uint64_t seed = 0;
};

/// Randomized SVD. Fixed-rank mode samples rank + oversampling columns.
/// Tolerance mode grows the range block by block, deflating a residual copy
/// of A and re-checking its Frobenius norm after every round; sampling
/// resumes from the deflated residual, so earlier work is kept.
Basis randomized_svd(const BlockedMatrix& a, const TruncationSpec& trunc, const RandomizedOptions& opts);

struct LanczosParams {
  Index k = 32;           // subspace size built per outer iteration
  Index rank = 16;        // Ritz vectors kept between outer iterations
  Index nsv = 8;          // leading values tested for convergence
  Index block_cols = 8;   // Krylov block width
  double convergence_tol = 1e-10;
  int max_outer_iterations = 200;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless 1 <= nsv <= rank <= k and block_cols >= 1.
  void validate() const;
};

/// Raised when Lanczos exhausts max_outer_iterations; carries the best iterate.
class SvdNotConverged : public std::runtime_error {
 public:
  SvdNotConverged(const std::string& what, Basis best, int iterations)
      : std::runtime_error(what), best_(std::move(best)), iterations_(iterations) {}
  const Basis& best() const noexcept { return best_; }
  int iterations() const noexcept { return iterations_; }

 private:
  Basis best_;
  int iterations_;
};

struct LanczosStats {
  int outer_iterations = 0;
  int skipped_iterations = 0;  // iterations not run because the convergence check cancelled them
};

/// Thick-restart block Lanczos with full reorthogonalization. Each outer
/// iteration extends the kept Ritz block to k columns with Krylov blocks of
/// A^T A, then takes Ritz values from the QR of A V. Converged once the top
/// nsv values change by at most convergence_tol (relative) between outer
/// iterations; the check then cancels the remaining iterations. In tolerance
/// mode, nsv/rank/k grow by block_cols until the truncation bound is met.
Basis lanczos_svd(const BlockedMatrix& a, const LanczosParams& params, const TruncationSpec& trunc,
                  LanczosStats* stats = nullptr, CancellationToken* cancel = nullptr);

enum class SvdAlgorithm { full_tsqr, randomized, lanczos };

SvdAlgorithm parse_svd_algorithm(const std::string& name);
std::string to_string(SvdAlgorithm algorithm);

struct SvdSettings {
  SvdAlgorithm algorithm = SvdAlgorithm::full_tsqr;
  TruncationSpec truncation;
  RandomizedOptions randomized;
  LanczosParams lanczos;
};

Basis compute_basis(const BlockedMatrix& a, const SvdSettings& settings);

// ---------------------------------------------------------------------------
// Persistence: vectors in BMX1, metadata in a JSON sidecar.

void save_basis(const std::filesystem::path& bmx_path, const Basis& basis);
Basis load_basis(const std::filesystem::path& bmx_path);
std::filesystem::path basis_sidecar_path(const std::filesystem::path& bmx_path);

}  // namespace romflow
