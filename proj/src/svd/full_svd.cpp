#include "romflow/svd.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <string>

namespace romflow {

namespace {

Index pick_rank(const std::vector<double>& sigma, const TruncationSpec& trunc, double total_sq) {
  const Index avail = static_cast<Index>(sigma.size());
  if (trunc.mode == TruncationSpec::Mode::fixed_rank) return trunc.rank;
  return std::min(avail, tolerance_rank(sigma, trunc.epsilon, total_sq));
}

}  // namespace

Basis full_svd(const BlockedMatrix& a, const TruncationSpec& trunc) {
  const Index min_dim = std::min(a.rows(), a.cols());
  if (trunc.mode == TruncationSpec::Mode::fixed_rank && trunc.rank > min_dim) {
    throw std::invalid_argument("full_svd: rank " + std::to_string(trunc.rank) +
                                " exceeds min dimension " + std::to_string(min_dim));
  }

  // Left singular vectors are left_factor * left_small.
  BlockedMatrix left_factor;
  Dense left_small;
  std::vector<double> sigma;
  if (a.rows() >= a.cols()) {
    TsqrResult qr = tsqr(a);
    Eigen::BDCSVD<Dense> svd(qr.r, Eigen::ComputeThinU);
    left_factor = std::move(qr.q);
    left_small = svd.matrixU();
    sigma.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
  } else {
    // A^T = Q R  =>  A = R^T Q^T, and R^T = U S W^T gives the left vectors U.
    TsqrResult qr = tsqr(transpose(a));
    Eigen::BDCSVD<Dense> svd(qr.r.transpose(), Eigen::ComputeThinU);
    left_small = svd.matrixU();
    sigma.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
  }

  double total_sq = 0.0;
  for (double s : sigma) total_sq += s * s;

  Basis out;
  out.truncation = trunc;
  Index n = pick_rank(sigma, trunc, total_sq);
  for (;;) {
    const Dense coeffs = left_small.leftCols(n);
    BlockedMatrix u = left_factor.empty()
                          ? BlockedMatrix::from_dense(coeffs, BlockShape(a.block_shape().rows_per_block,
                                                                         a.block_shape().cols_per_block))
                          : matmul(left_factor, coeffs);
    out.vectors = normalize_column_signs(u);
    out.singular_values.assign(sigma.begin(), sigma.begin() + n);
    out.achieved_error = projection_error(out.vectors, a);
    // The singular-value tail is exact in exact arithmetic only; the measured
    // error is authoritative.
    if (trunc.mode == TruncationSpec::Mode::fixed_rank || out.achieved_error <= trunc.epsilon ||
        n == static_cast<Index>(sigma.size())) {
      break;
    }
    ++n;
  }
  return out;
}

}  // namespace romflow
