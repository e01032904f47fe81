#include "romflow/blocks.hpp"

#include "romflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace romflow {

namespace {

std::string dims(const BlockedMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Gathers the rectangle [r0, r0+nr) x [c0, c0+nc) from the block grid.
Dense region(const BlockedMatrix& src, Index r0, Index c0, Index nr, Index nc) {
  Dense out(nr, nc);
  const BlockShape& s = src.block_shape();
  const Index bi0 = r0 / s.rows_per_block;
  const Index bj0 = c0 / s.cols_per_block;
  for (Index bi = bi0; bi < src.grid().block_rows && src.block_row_start(bi) < r0 + nr; ++bi) {
    const Index rs = std::max(r0, src.block_row_start(bi));
    const Index re = std::min(r0 + nr, src.block_row_start(bi) + src.block_row_size(bi));
    for (Index bj = bj0; bj < src.grid().block_cols && src.block_col_start(bj) < c0 + nc; ++bj) {
      const Index cs = std::max(c0, src.block_col_start(bj));
      const Index ce = std::min(c0 + nc, src.block_col_start(bj) + src.block_col_size(bj));
      out.block(rs - r0, cs - c0, re - rs, ce - cs) =
          src.block(bi, bj).block(rs - src.block_row_start(bi), cs - src.block_col_start(bj),
                                  re - rs, ce - cs);
    }
  }
  return out;
}

bool same_grid(const BlockedMatrix& a, const BlockedMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a.block_shape() == b.block_shape();
}

Index block_count(const BlockedMatrix& m) { return m.grid().block_rows * m.grid().block_cols; }

template <class Fn>
void for_each_block(BlockedMatrix& out, Fn&& fn) {
  const Index nb = block_count(out);
  const Index gc = out.grid().block_cols;
#pragma omp parallel for schedule(static)
  for (Index f = 0; f < nb; ++f) {
    fn(f / gc, f % gc);
  }
}

}  // namespace

BlockedMatrix rechunk(const BlockedMatrix& a, BlockShape shape) {
  if (a.block_shape() == shape) return a;
  BlockedMatrix out(a.rows(), a.cols(), shape);
  for_each_block(out, [&](Index bi, Index bj) {
    out.block(bi, bj) = region(a, out.block_row_start(bi), out.block_col_start(bj),
                               out.block_row_size(bi), out.block_col_size(bj));
  });
  return out;
}

BlockedMatrix matmul(const BlockedMatrix& a, const BlockedMatrix& b_in) {
  if (a.cols() != b_in.rows()) {
    throw ShapeError("matmul: " + dims(a) + " times " + dims(b_in));
  }
  const BlockedMatrix b =
      rechunk(b_in, BlockShape(a.block_shape().cols_per_block, b_in.block_shape().cols_per_block));
  BlockedMatrix out(a.rows(), b.cols(),
                    BlockShape(a.block_shape().rows_per_block, b.block_shape().cols_per_block));
  const Index inner = a.grid().block_cols;
  for_each_block(out, [&](Index bi, Index bj) {
    Dense& c = out.block(bi, bj);
    for (Index k = 0; k < inner; ++k) {
      c.noalias() += a.block(bi, k) * b.block(k, bj);
    }
  });
  return out;
}

BlockedMatrix matmul(const BlockedMatrix& a, const Dense& m) {
  if (a.cols() != m.rows()) {
    throw ShapeError("matmul: " + dims(a) + " times dense " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
  BlockedMatrix out(a.rows(), m.cols(), a.block_shape());
  const Index inner = a.grid().block_cols;
  for_each_block(out, [&](Index bi, Index bj) {
    Dense& c = out.block(bi, bj);
    for (Index k = 0; k < inner; ++k) {
      c.noalias() += a.block(bi, k) * m.block(a.block_col_start(k), out.block_col_start(bj),
                                              a.block_col_size(k), out.block_col_size(bj));
    }
  });
  return out;
}

BlockedMatrix transpose_matmul(const BlockedMatrix& a, const BlockedMatrix& b_in) {
  if (a.rows() != b_in.rows()) {
    throw ShapeError("transpose_matmul: " + dims(a) + "^T times " + dims(b_in));
  }
  const BlockedMatrix b =
      rechunk(b_in, BlockShape(a.block_shape().rows_per_block, b_in.block_shape().cols_per_block));
  BlockedMatrix out(a.cols(), b.cols(),
                    BlockShape(a.block_shape().cols_per_block, b.block_shape().cols_per_block));
  const Index inner = a.grid().block_rows;
  for_each_block(out, [&](Index bi, Index bj) {
    Dense& c = out.block(bi, bj);
    for (Index k = 0; k < inner; ++k) {
      c.noalias() += a.block(k, bi).transpose() * b.block(k, bj);
    }
  });
  return out;
}

Dense transpose_matmul_dense(const BlockedMatrix& a, const BlockedMatrix& b) {
  return transpose_matmul(a, b).to_dense();
}

BlockedMatrix add(const BlockedMatrix& a, const BlockedMatrix& b_in) {
  if (a.rows() != b_in.rows() || a.cols() != b_in.cols()) {
    throw ShapeError("add: " + dims(a) + " and " + dims(b_in));
  }
  const BlockedMatrix b = same_grid(a, b_in) ? b_in : rechunk(b_in, a.block_shape());
  BlockedMatrix out(a.rows(), a.cols(), a.block_shape());
  for_each_block(out, [&](Index bi, Index bj) { out.block(bi, bj) = a.block(bi, bj) + b.block(bi, bj); });
  return out;
}

BlockedMatrix sub(const BlockedMatrix& a, const BlockedMatrix& b_in) {
  if (a.rows() != b_in.rows() || a.cols() != b_in.cols()) {
    throw ShapeError("sub: " + dims(a) + " and " + dims(b_in));
  }
  const BlockedMatrix b = same_grid(a, b_in) ? b_in : rechunk(b_in, a.block_shape());
  BlockedMatrix out(a.rows(), a.cols(), a.block_shape());
  for_each_block(out, [&](Index bi, Index bj) { out.block(bi, bj) = a.block(bi, bj) - b.block(bi, bj); });
  return out;
}

BlockedMatrix scale_cols(const BlockedMatrix& a, std::span<const double> w) {
  if (static_cast<Index>(w.size()) != a.cols()) {
    throw ShapeError("scale_cols: " + std::to_string(w.size()) + " weights for " + dims(a));
  }
  const Eigen::Map<const Vector> wv(w.data(), a.cols());
  BlockedMatrix out(a.rows(), a.cols(), a.block_shape());
  for_each_block(out, [&](Index bi, Index bj) {
    out.block(bi, bj) =
        a.block(bi, bj) * wv.segment(a.block_col_start(bj), a.block_col_size(bj)).asDiagonal();
  });
  return out;
}

BlockedMatrix scale_rows(const BlockedMatrix& a, std::span<const double> w) {
  if (static_cast<Index>(w.size()) != a.rows()) {
    throw ShapeError("scale_rows: " + std::to_string(w.size()) + " weights for " + dims(a));
  }
  const Eigen::Map<const Vector> wv(w.data(), a.rows());
  BlockedMatrix out(a.rows(), a.cols(), a.block_shape());
  for_each_block(out, [&](Index bi, Index bj) {
    out.block(bi, bj) =
        wv.segment(a.block_row_start(bi), a.block_row_size(bi)).asDiagonal() * a.block(bi, bj);
  });
  return out;
}

double frobenius_norm(const BlockedMatrix& a) {
  const Index nb = block_count(a);
  const Index gc = a.grid().block_cols;
  std::vector<double> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
  for (Index f = 0; f < nb; ++f) {
    partial[static_cast<std::size_t>(f)] = a.block(f / gc, f % gc).squaredNorm();
  }
  double sum = 0.0;
  for (double p : partial) sum += p;
  return std::sqrt(sum);
}

BlockedMatrix select_rows(const BlockedMatrix& a, std::span<const Index> indices) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= a.rows()) {
      throw IndexError("select_rows: index " + std::to_string(indices[i]) + " outside [0, " +
                       std::to_string(a.rows()) + ")");
    }
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw std::invalid_argument("select_rows: indices must be strictly increasing");
    }
  }
  if (indices.empty()) {
    throw std::invalid_argument("select_rows: empty index set");
  }
  BlockedMatrix out(static_cast<Index>(indices.size()), a.cols(), a.block_shape());
  const Index rpb = a.block_shape().rows_per_block;
  for_each_block(out, [&](Index bi, Index bj) {
    Dense& c = out.block(bi, bj);
    for (Index r = 0; r < c.rows(); ++r) {
      const Index src = indices[static_cast<std::size_t>(out.block_row_start(bi) + r)];
      c.row(r) = a.block(src / rpb, bj).row(src % rpb);
    }
  });
  return out;
}

BlockedMatrix vstack(const BlockedMatrix& a, const BlockedMatrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("vstack: " + dims(a) + " over " + dims(b));
  }
  BlockedMatrix out(a.rows() + b.rows(), a.cols(), a.block_shape());
  for_each_block(out, [&](Index bi, Index bj) {
    const Index r0 = out.block_row_start(bi);
    const Index nr = out.block_row_size(bi);
    const Index c0 = out.block_col_start(bj);
    const Index nc = out.block_col_size(bj);
    Dense& c = out.block(bi, bj);
    const Index from_a = std::clamp<Index>(a.rows() - r0, 0, nr);
    if (from_a > 0) c.topRows(from_a) = region(a, r0, c0, from_a, nc);
    if (nr - from_a > 0) c.bottomRows(nr - from_a) = region(b, r0 + from_a - a.rows(), c0, nr - from_a, nc);
  });
  return out;
}

BlockedMatrix hstack(const BlockedMatrix& a, const BlockedMatrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("hstack: " + dims(a) + " beside " + dims(b));
  }
  BlockedMatrix out(a.rows(), a.cols() + b.cols(), a.block_shape());
  for_each_block(out, [&](Index bi, Index bj) {
    const Index r0 = out.block_row_start(bi);
    const Index nr = out.block_row_size(bi);
    const Index c0 = out.block_col_start(bj);
    const Index nc = out.block_col_size(bj);
    Dense& c = out.block(bi, bj);
    const Index from_a = std::clamp<Index>(a.cols() - c0, 0, nc);
    if (from_a > 0) c.leftCols(from_a) = region(a, r0, c0, nr, from_a);
    if (nc - from_a > 0) c.rightCols(nc - from_a) = region(b, r0, c0 + from_a - a.cols(), nr, nc - from_a);
  });
  return out;
}

BlockedMatrix transpose(const BlockedMatrix& a) {
  BlockedMatrix out(a.cols(), a.rows(),
                    BlockShape(a.block_shape().cols_per_block, a.block_shape().rows_per_block));
  for_each_block(out, [&](Index bi, Index bj) { out.block(bi, bj) = a.block(bj, bi).transpose(); });
  return out;
}

}  // namespace romflow
