#include "romflow/blocks.hpp"

#include "romflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace romflow {

namespace {

Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

}  // namespace

BlockShape::BlockShape(Index rows, Index cols) : rows_per_block(rows), cols_per_block(cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("block shape must be at least 1x1, got " + std::to_string(rows) +
                                "x" + std::to_string(cols));
  }
}

GridShape grid_shape(Index global_rows, Index global_cols, BlockShape shape) {
  if (global_rows < 1 || global_cols < 1) {
    throw std::invalid_argument("grid_shape: matrix dimensions must be positive");
  }
  if (shape.rows_per_block < 1 || shape.cols_per_block < 1) {
    throw std::invalid_argument("grid_shape: block dimensions must be positive");
  }
  return {ceil_div(global_rows, shape.rows_per_block), ceil_div(global_cols, shape.cols_per_block)};
}

BlockedMatrix::BlockedMatrix(Index rows, Index cols, BlockShape shape)
    : rows_(rows), cols_(cols), shape_(shape), grid_(grid_shape(rows, cols, shape)) {
  blocks_.resize(static_cast<std::size_t>(grid_.block_rows * grid_.block_cols));
  for (Index bi = 0; bi < grid_.block_rows; ++bi) {
    for (Index bj = 0; bj < grid_.block_cols; ++bj) {
      block(bi, bj) = Dense::Zero(block_row_size(bi), block_col_size(bj));
    }
  }
}

Index BlockedMatrix::block_row_size(Index bi) const {
  return std::min(shape_.rows_per_block, rows_ - block_row_start(bi));
}

Index BlockedMatrix::block_col_size(Index bj) const {
  return std::min(shape_.cols_per_block, cols_ - block_col_start(bj));
}

BlockedMatrix BlockedMatrix::from_dense(const Dense& matrix, BlockShape shape) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw std::invalid_argument("from_dense: matrix must be non-empty");
  }
  BlockedMatrix out(matrix.rows(), matrix.cols(), shape);
  for (Index bi = 0; bi < out.grid_.block_rows; ++bi) {
    for (Index bj = 0; bj < out.grid_.block_cols; ++bj) {
      out.block(bi, bj) = matrix.block(out.block_row_start(bi), out.block_col_start(bj),
                                       out.block_row_size(bi), out.block_col_size(bj));
    }
  }
  return out;
}

Dense BlockedMatrix::to_dense() const {
  Dense out(rows_, cols_);
  for (Index bi = 0; bi < grid_.block_rows; ++bi) {
    for (Index bj = 0; bj < grid_.block_cols; ++bj) {
      out.block(block_row_start(bi), block_col_start(bj), block_row_size(bi), block_col_size(bj)) =
          block(bi, bj);
    }
  }
  return out;
}

void BlockedMatrix::set_columns(Index first_col, const Dense& values) {
  if (values.rows() != rows_ || first_col < 0 || first_col + values.cols() > cols_) {
    throw ShapeError("set_columns: " + std::to_string(values.rows()) + "x" +
                     std::to_string(values.cols()) + " at column " + std::to_string(first_col) +
                     " does not fit a " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                     " matrix");
  }
  const Index last_col = first_col + values.cols();
  for (Index bj = first_col / shape_.cols_per_block; bj < grid_.block_cols; ++bj) {
    const Index c0 = std::max(first_col, block_col_start(bj));
    const Index c1 = std::min(last_col, block_col_start(bj) + block_col_size(bj));
    if (c0 >= c1) break;
    for (Index bi = 0; bi < grid_.block_rows; ++bi) {
      block(bi, bj).middleCols(c0 - block_col_start(bj), c1 - c0) =
          values.block(block_row_start(bi), c0 - first_col, block_row_size(bi), c1 - c0);
    }
  }
}

void BlockedMatrix::set_rows(Index first_row, const Dense& values) {
  if (values.cols() != cols_ || first_row < 0 || first_row + values.rows() > rows_) {
    throw ShapeError("set_rows: " + std::to_string(values.rows()) + "x" +
                     std::to_string(values.cols()) + " at row " + std::to_string(first_row) +
                     " does not fit a " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                     " matrix");
  }
  const Index last_row = first_row + values.rows();
  for (Index bi = first_row / shape_.rows_per_block; bi < grid_.block_rows; ++bi) {
    const Index r0 = std::max(first_row, block_row_start(bi));
    const Index r1 = std::min(last_row, block_row_start(bi) + block_row_size(bi));
    if (r0 >= r1) break;
    for (Index bj = 0; bj < grid_.block_cols; ++bj) {
      block(bi, bj).middleRows(r0 - block_row_start(bi), r1 - r0) =
          values.block(r0 - first_row, block_col_start(bj), r1 - r0, block_col_size(bj));
    }
  }
}

Dense BlockedMatrix::columns(Index first_col, Index count) const {
  if (first_col < 0 || count < 0 || first_col + count > cols_) {
    throw IndexError("columns: range out of bounds");
  }
  Dense out(rows_, count);
  const Index last_col = first_col + count;
  for (Index bj = 0; bj < grid_.block_cols; ++bj) {
    const Index c0 = std::max(first_col, block_col_start(bj));
    const Index c1 = std::min(last_col, block_col_start(bj) + block_col_size(bj));
    if (c0 >= c1) continue;
    for (Index bi = 0; bi < grid_.block_rows; ++bi) {
      out.block(block_row_start(bi), c0 - first_col, block_row_size(bi), c1 - c0) =
          block(bi, bj).middleCols(c0 - block_col_start(bj), c1 - c0);
    }
  }
  return out;
}

Dense BlockedMatrix::row_panel(Index bi) const {
  Dense out(block_row_size(bi), cols_);
  for (Index bj = 0; bj < grid_.block_cols; ++bj) {
    out.middleCols(block_col_start(bj), block_col_size(bj)) = block(bi, bj);
  }
  return out;
}

Dense BlockedMatrix::row_range(Index first_row, Index count) const {
  if (first_row < 0 || count < 0 || first_row + count > rows_) {
    throw IndexError("row_range: range out of bounds");
  }
  Dense out(count, cols_);
  const Index last_row = first_row + count;
  for (Index bi = 0; bi < grid_.block_rows; ++bi) {
    const Index r0 = std::max(first_row, block_row_start(bi));
    const Index r1 = std::min(last_row, block_row_start(bi) + block_row_size(bi));
    if (r0 >= r1) continue;
    for (Index bj = 0; bj < grid_.block_cols; ++bj) {
      out.block(r0 - first_row, block_col_start(bj), r1 - r0, block_col_size(bj)) =
          block(bi, bj).middleRows(r0 - block_row_start(bi), r1 - r0);
    }
  }
  return out;
}

bool BlockedMatrix::all_finite() const {
  return std::all_of(blocks_.begin(), blocks_.end(), [](const Dense& b) { return b.allFinite(); });
}

}  // namespace romflow
