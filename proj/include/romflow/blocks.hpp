#pragma once

// Blocked two-dimensional matrix: a 2-D grid of dense column-major blocks.
//
// Every large matrix in the pipeline (snapshots, projected residuals, bases)
// lives in a BlockedMatrix. Edge blocks are smaller than the nominal block
// shape, never padded, so to_dense(from_dense(A)) is bit-identical to A.
//
// Kernels in namespace romflow run one task per output block under OpenMP.
// Each block is computed by exactly one thread with a fixed inner order and
// cross-block reductions are folded serially in grid row-major order, so the
// results do not depend on the number of threads. Namespace romflow::ref holds
// plain serial loops with the same contracts; they exist for testing and
// benchmarking.

#include <Eigen/Dense>

#include <compare>
#include <span>
#include <vector>

namespace romflow {

using Index = Eigen::Index;
using Dense = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct BlockShape {
  Index rows_per_block = 1;
  Index cols_per_block = 1;

  BlockShape() = default;
  BlockShape(Index rows, Index cols);

  friend bool operator==(const BlockShape&, const BlockShape&) = default;
};

struct GridShape {
  Index block_rows = 0;
  Index block_cols = 0;

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Ceiling-division grid dimensions. Throws std::invalid_argument on zero input.
GridShape grid_shape(Index global_rows, Index global_cols, BlockShape shape);

class BlockedMatrix {
 public:
  BlockedMatrix() = default;

  /// Zero-filled matrix with its full block grid allocated up front.
  BlockedMatrix(Index rows, Index cols, BlockShape shape);

  static BlockedMatrix from_dense(const Dense& matrix, BlockShape shape);
  Dense to_dense() const;

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  const BlockShape& block_shape() const noexcept { return shape_; }
  const GridShape& grid() const noexcept { return grid_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  Index block_row_start(Index bi) const { return bi * shape_.rows_per_block; }
  Index block_col_start(Index bj) const { return bj * shape_.cols_per_block; }
  Index block_row_size(Index bi) const;
  Index block_col_size(Index bj) const;

  const Dense& block(Index bi, Index bj) const { return blocks_[flat(bi, bj)]; }
  Dense& block(Index bi, Index bj) { return blocks_[flat(bi, bj)]; }

  /// Writes a dense column range into the pre-allocated grid. Concurrent calls
  /// on disjoint column ranges are safe.
  void set_columns(Index first_col, const Dense& values);
  Dense columns(Index first_col, Index count) const;
  /// Row-range counterpart of set_columns.
  void set_rows(Index first_row, const Dense& values);

  /// All blocks of block-row bi gathered into one dense panel.
  Dense row_panel(Index bi) const;
  /// Rows [first_row, first_row + count) gathered into a dense matrix.
  Dense row_range(Index first_row, Index count) const;

  bool all_finite() const;

 private:
  std::size_t flat(Index bi, Index bj) const {
    return static_cast<std::size_t>(bi * grid_.block_cols + bj);
  }

  Index rows_ = 0;
  Index cols_ = 0;
  BlockShape shape_;
  GridShape grid_;
  std::vector<Dense> blocks_;
};

// Parallel kernels. Output block shapes are stated per function.

/// A*B; result blocked as (A.rows_per_block, B.cols_per_block).
BlockedMatrix matmul(const BlockedMatrix& a, const BlockedMatrix& b);
/// A*M for a small dense M; result keeps A's block shape.
BlockedMatrix matmul(const BlockedMatrix& a, const Dense& m);
/// A^T*B without forming A^T; result blocked as (A.cols_per_block, B.cols_per_block).
BlockedMatrix transpose_matmul(const BlockedMatrix& a, const BlockedMatrix& b);
/// A^T*B gathered into a dense matrix (for small results such as Q^T*A).
Dense transpose_matmul_dense(const BlockedMatrix& a, const BlockedMatrix& b);

BlockedMatrix add(const BlockedMatrix& a, const BlockedMatrix& b);
BlockedMatrix sub(const BlockedMatrix& a, const BlockedMatrix& b);
/// A * diag(w).
BlockedMatrix scale_cols(const BlockedMatrix& a, std::span<const double> w);
/// diag(w) * A.
BlockedMatrix scale_rows(const BlockedMatrix& a, std::span<const double> w);
double frobenius_norm(const BlockedMatrix& a);
/// Rows at strictly increasing indices; keeps A's block shape.
BlockedMatrix select_rows(const BlockedMatrix& a, std::span<const Index> indices);
/// [A; B]; keeps A's block shape.
BlockedMatrix vstack(const BlockedMatrix& a, const BlockedMatrix& b);
/// [A, B]; keeps A's block shape.
BlockedMatrix hstack(const BlockedMatrix& a, const BlockedMatrix& b);
/// A^T blocked as (A.cols_per_block, A.rows_per_block).
BlockedMatrix transpose(const BlockedMatrix& a);
/// Same values under a different block shape.
BlockedMatrix rechunk(const BlockedMatrix& a, BlockShape shape);

namespace ref {

BlockedMatrix matmul(const BlockedMatrix& a, const BlockedMatrix& b);
BlockedMatrix transpose_matmul(const BlockedMatrix& a, const BlockedMatrix& b);
BlockedMatrix sub(const BlockedMatrix& a, const BlockedMatrix& b);
BlockedMatrix scale_cols(const BlockedMatrix& a, std::span<const double> w);
double frobenius_norm(const BlockedMatrix& a);
BlockedMatrix select_rows(const BlockedMatrix& a, std::span<const Index> indices);
BlockedMatrix vstack(const BlockedMatrix& a, const BlockedMatrix& b);

}  // namespace ref

}  // namespace romflow
