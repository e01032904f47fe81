#include "romflow/svd.hpp"

#include "romflow/random.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace romflow {

namespace {

// Range sample of m with power iterations, orthonormalized against q.
BlockedMatrix sample_range(const BlockedMatrix& m, const BlockedMatrix* q, Index cols, Index first_col,
                           const RandomizedOptions& opts) {
  const Dense omega = gaussian_matrix(m.cols(), cols, opts.seed, first_col);
  BlockedMatrix y = matmul(m, omega);
  for (Index p = 0; p < opts.power_iters; ++p) {
    BlockedMatrix y_orth = orthonormalize_against(nullptr, y);
    if (y_orth.empty()) break;
    BlockedMatrix z = orthonormalize_against(nullptr, transpose_matmul(m, y_orth));
    if (z.empty()) break;
    y = matmul(m, z);
  }
  return orthonormalize_against(q, y);
}

Basis finish(const BlockedMatrix& q, const BlockedMatrix& a, Index n, const Eigen::BDCSVD<Dense>& svd,
             const TruncationSpec& trunc) {
  Basis out;
  out.truncation = trunc;
  out.vectors = normalize_column_signs(matmul(q, Dense(svd.matrixU().leftCols(n))));
  const auto& s = svd.singularValues();
  out.singular_values.assign(s.data(), s.data() + n);
  out.achieved_error = projection_error(out.vectors, a);
  return out;
}

}  // namespace

Basis randomized_svd(const BlockedMatrix& a, const TruncationSpec& trunc, const RandomizedOptions& opts) {
  if (opts.oversampling < 0 || opts.power_iters < 0 || opts.growth_step < 1) {
    throw std::invalid_argument("randomized_svd: invalid options");
  }
  const Index min_dim = std::min(a.rows(), a.cols());

  if (trunc.mode == TruncationSpec::Mode::fixed_rank) {
    if (trunc.rank > min_dim) {
      throw std::invalid_argument("randomized_svd: rank " + std::to_string(trunc.rank) +
                                  " exceeds min dimension " + std::to_string(min_dim));
    }
    const Index l = std::min(trunc.rank + opts.oversampling, min_dim);
    BlockedMatrix q = sample_range(a, nullptr, l, 0, opts);
    const Dense b = transpose_matmul_dense(q, a);
    Eigen::BDCSVD<Dense> svd(b, Eigen::ComputeThinU);
    return finish(q, a, std::min(trunc.rank, q.cols()), svd, trunc);
  }

  // Tolerance mode: grow Q while deflating a residual copy of A. With
  // R = (I - QQ^T)A, ||A - U_k U_k^T A||^2 = ||R||^2 + tail of the spectrum of
  // B = Q^T A beyond k, so the check below is exact.
  const double norm_sq = std::pow(frobenius_norm(a), 2);
  const double bound_sq = trunc.epsilon * trunc.epsilon * norm_sq;
  BlockedMatrix residual = a;
  BlockedMatrix q;
  Index drawn = 0;
  for (;;) {
    const Index step = std::min(opts.growth_step, min_dim - q.cols());
    BlockedMatrix q_new;
    if (step > 0) {
      q_new = sample_range(residual, q.empty() ? nullptr : &q, step, drawn, opts);
      drawn += step;
    }
    if (!q_new.empty()) {
      residual = sub(residual, matmul(q_new, transpose_matmul_dense(q_new, residual)));
      q = q.empty() ? q_new : hstack(q, q_new);
    }
    const bool exhausted = q_new.empty() || q.cols() >= min_dim;
    const double res_sq = std::pow(frobenius_norm(residual), 2);
    if (res_sq <= bound_sq || exhausted) {
      if (q.empty()) {
        // A is zero; any unit vector is an optimal basis.
        q = orthonormalize_against(
            nullptr, BlockedMatrix::from_dense(gaussian_matrix(a.rows(), 1, opts.seed), a.block_shape()));
      }
      const Dense b = transpose_matmul_dense(q, a);
      Eigen::BDCSVD<Dense> svd(b, Eigen::ComputeThinU);
      const auto& s = svd.singularValues();
      const std::vector<double> sigma(s.data(), s.data() + s.size());
      Index n = std::min<Index>(static_cast<Index>(sigma.size()),
                                tolerance_rank(sigma, trunc.epsilon, norm_sq, res_sq));
      for (;; ++n) {
        Basis out = finish(q, a, n, svd, trunc);
        if (out.achieved_error <= trunc.epsilon || n == static_cast<Index>(sigma.size())) {
          if (out.achieved_error <= trunc.epsilon || exhausted) return out;
          break;
        }
      }
    }
  }
}

}  // namespace romflow
