// Serial reference kernels: scalar loops over the block grid, no Eigen
// products, no threading. Kept for testing and benchmarking the OpenMP path.

#include "romflow/blocks.hpp"

#include "romflow/errors.hpp"

#include <cmath>
#include <string>

namespace romflow::ref {

namespace {

double at(const BlockedMatrix& m, Index r, Index c) {
  const BlockShape& s = m.block_shape();
  return m.block(r / s.rows_per_block, c / s.cols_per_block)(r % s.rows_per_block, c % s.cols_per_block);
}

double& at(BlockedMatrix& m, Index r, Index c) {
  const BlockShape& s = m.block_shape();
  return m.block(r / s.rows_per_block, c / s.cols_per_block)(r % s.rows_per_block, c % s.cols_per_block);
}

}  // namespace

BlockedMatrix matmul(const BlockedMatrix& a, const BlockedMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("ref::matmul: inner dimensions differ");
  BlockedMatrix out(a.rows(), b.cols(),
                    BlockShape(a.block_shape().rows_per_block, b.block_shape().cols_per_block));
  for (Index j = 0; j < b.cols(); ++j) {
    for (Index k = 0; k < a.cols(); ++k) {
      const double bkj = at(b, k, j);
      for (Index i = 0; i < a.rows(); ++i) at(out, i, j) += at(a, i, k) * bkj;
    }
  }
  return out;
}

BlockedMatrix transpose_matmul(const BlockedMatrix& a, const BlockedMatrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("ref::transpose_matmul: row counts differ");
  BlockedMatrix out(a.cols(), b.cols(),
                    BlockShape(a.block_shape().cols_per_block, b.block_shape().cols_per_block));
  for (Index i = 0; i < a.cols(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < a.rows(); ++k) s += at(a, k, i) * at(b, k, j);
      at(out, i, j) = s;
    }
  }
  return out;
}

BlockedMatrix sub(const BlockedMatrix& a, const BlockedMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("ref::sub: shapes differ");
  BlockedMatrix out(a.rows(), a.cols(), a.block_shape());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) at(out, i, j) = at(a, i, j) - at(b, i, j);
  return out;
}

BlockedMatrix scale_cols(const BlockedMatrix& a, std::span<const double> w) {
  if (static_cast<Index>(w.size()) != a.cols()) throw ShapeError("ref::scale_cols: weight count");
  BlockedMatrix out(a.rows(), a.cols(), a.block_shape());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) at(out, i, j) = at(a, i, j) * w[static_cast<std::size_t>(j)];
  return out;
}

double frobenius_norm(const BlockedMatrix& a) {
  double s = 0.0;
  for (Index bi = 0; bi < a.grid().block_rows; ++bi)
    for (Index bj = 0; bj < a.grid().block_cols; ++bj) {
      const Dense& blk = a.block(bi, bj);
      double p = 0.0;
      for (Index c = 0; c < blk.cols(); ++c)
        for (Index r = 0; r < blk.rows(); ++r) p += blk(r, c) * blk(r, c);
      s += p;
    }
  return std::sqrt(s);
}

BlockedMatrix select_rows(const BlockedMatrix& a, std::span<const Index> indices) {
  if (indices.empty()) throw std::invalid_argument("ref::select_rows: empty index set");
  BlockedMatrix out(static_cast<Index>(indices.size()), a.cols(), a.block_shape());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] < 0 || indices[r] >= a.rows()) throw IndexError("ref::select_rows: index out of range");
    if (r > 0 && indices[r] <= indices[r - 1])
      throw std::invalid_argument("ref::select_rows: indices must be strictly increasing");
    for (Index j = 0; j < a.cols(); ++j) at(out, static_cast<Index>(r), j) = at(a, indices[r], j);
  }
  return out;
}

BlockedMatrix vstack(const BlockedMatrix& a, const BlockedMatrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("ref::vstack: column counts differ");
  BlockedMatrix out(a.rows() + b.rows(), a.cols(), a.block_shape());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) at(out, i, j) = at(a, i, j);
    for (Index i = 0; i < b.rows(); ++i) at(out, a.rows() + i, j) = at(b, i, j);
  }
  return out;
}

}  // namespace romflow::ref
