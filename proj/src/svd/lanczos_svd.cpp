#include "romflow/svd.hpp"

#include "romflow/random.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace romflow {

namespace {

struct Ritz {
  BlockedMatrix left_factor;  // empty when the small SVD was taken of AV directly
  Dense left_small;
  Dense right;                // coefficients of the right Ritz vectors in V
  std::vector<double> sigma;
};

Ritz ritz_pairs(const BlockedMatrix& a, const BlockedMatrix& v) {
  const BlockedMatrix av = matmul(a, v);
  Ritz out;
  Eigen::BDCSVD<Dense> svd;
  if (av.rows() >= av.cols()) {
    TsqrResult qr = tsqr(av);
    svd.compute(qr.r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.left_factor = std::move(qr.q);
  } else {
    svd.compute(av.to_dense(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  }
  out.left_small = svd.matrixU();
  out.right = svd.matrixV();
  const auto& s = svd.singularValues();
  out.sigma.assign(s.data(), s.data() + s.size());
  return out;
}

Basis build_basis(const Ritz& r, Index n, const BlockedMatrix& a, const TruncationSpec& trunc) {
  const Dense coeffs = r.left_small.leftCols(n);
  BlockedMatrix u = r.left_factor.empty() ? BlockedMatrix::from_dense(coeffs, a.block_shape())
                                          : matmul(r.left_factor, coeffs);
  Basis out;
  out.truncation = trunc;
  out.vectors = normalize_column_signs(u);
  out.singular_values.assign(r.sigma.begin(), r.sigma.begin() + n);
  out.achieved_error = projection_error(out.vectors, a);
  return out;
}

bool values_settled(const std::vector<double>& now, const std::vector<double>& prev, Index nsv, double tol) {
  if (prev.size() < static_cast<std::size_t>(nsv) || now.size() < static_cast<std::size_t>(nsv)) {
    return false;
  }
  // Changes are measured against sigma_1 so that values at roundoff level
  // cannot stall convergence.
  const double scale = now.front();
  if (scale == 0.0) return true;
  for (Index i = 0; i < nsv; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (std::abs(now[u] - prev[u]) > tol * scale) return false;
  }
  return true;
}

}  // namespace

Basis lanczos_svd(const BlockedMatrix& a, const LanczosParams& params, const TruncationSpec& trunc,
                  LanczosStats* stats, CancellationToken* cancel) {
  params.validate();
  const Index n_cols = a.cols();
  const Index min_dim = std::min(a.rows(), a.cols());

  LanczosParams p = params;
  if (trunc.mode == TruncationSpec::Mode::fixed_rank) {
    if (trunc.rank > min_dim) {
      throw std::invalid_argument("lanczos_svd: rank " + std::to_string(trunc.rank) +
                                  " exceeds min dimension " + std::to_string(min_dim));
    }
    p.nsv = std::max(p.nsv, trunc.rank);
    p.rank = std::max(p.rank, p.nsv);
    p.k = std::max(p.k, p.rank + p.block_cols);
  }
  auto clamp_sizes = [&] {
    p.k = std::min(p.k, n_cols);
    p.rank = std::min(p.rank, p.k);
    p.nsv = std::min(p.nsv, std::min(p.rank, min_dim));
  };
  clamp_sizes();

  const BlockShape vshape(a.block_shape().cols_per_block, p.block_cols);
  Index drawn = 0;
  auto random_block = [&](Index cols) {
    BlockedMatrix g = BlockedMatrix::from_dense(gaussian_matrix(n_cols, cols, p.seed, drawn), vshape);
    drawn += cols;
    return g;
  };

  const double norm_sq = std::pow(frobenius_norm(a), 2);
  LanczosStats local_stats;
  BlockedMatrix kept = orthonormalize_against(nullptr, random_block(std::min(p.block_cols, n_cols)));

  for (;;) {
    CancellationToken round;
    bool converged = false;
    std::vector<double> prev;
    Ritz ritz;
    for (int it = 0; it < p.max_outer_iterations; ++it) {
      if (round.cancelled() || (cancel != nullptr && cancel->cancelled())) {
        local_stats.skipped_iterations += p.max_outer_iterations - it;
        break;
      }
      ++local_stats.outer_iterations;

      // Extend the kept block with Krylov blocks of A^T A, fully reorthogonalized.
      BlockedMatrix v = kept;
      BlockedMatrix last = kept;
      while (v.cols() < p.k) {
        BlockedMatrix fresh = orthonormalize_against(&v, transpose_matmul(a, matmul(a, last)));
        if (fresh.empty()) fresh = orthonormalize_against(&v, random_block(p.block_cols));
        if (fresh.empty()) break;
        if (v.cols() + fresh.cols() > p.k) {
          fresh = BlockedMatrix::from_dense(fresh.columns(0, p.k - v.cols()), vshape);
        }
        v = hstack(v, fresh);
        last = std::move(fresh);
      }

      ritz = ritz_pairs(a, v);
      const Index keep = std::min<Index>(p.rank, static_cast<Index>(ritz.sigma.size()));
      kept = matmul(v, Dense(ritz.right.leftCols(keep)));

      if (values_settled(ritz.sigma, prev, p.nsv, p.convergence_tol)) {
        converged = true;
        round.cancel();
      }
      prev = ritz.sigma;
    }

    const Index avail = std::min<Index>(p.nsv, static_cast<Index>(ritz.sigma.size()));
    if (!converged) {
      if (stats != nullptr) *stats = local_stats;
      throw SvdNotConverged("lanczos_svd: top " + std::to_string(p.nsv) + " singular values not settled after " +
                                std::to_string(p.max_outer_iterations) + " outer iterations",
                            build_basis(ritz, std::max<Index>(avail, 1), a, trunc), local_stats.outer_iterations);
    }

    if (trunc.mode == TruncationSpec::Mode::fixed_rank) {
      if (cancel != nullptr) cancel->cancel();
      if (stats != nullptr) *stats = local_stats;
      return build_basis(ritz, trunc.rank, a, trunc);
    }

    double captured = 0.0;
    for (Index i = 0; i < avail; ++i) captured += ritz.sigma[static_cast<std::size_t>(i)] * ritz.sigma[static_cast<std::size_t>(i)];
    const std::span<const double> top(ritz.sigma.data(), static_cast<std::size_t>(avail));
    Index n = std::min(avail, tolerance_rank(top, trunc.epsilon, norm_sq, std::max(0.0, norm_sq - captured)));
    for (; n <= avail; ++n) {
      Basis out = build_basis(ritz, n, a, trunc);
      const bool last_chance = p.nsv >= min_dim;
      if (out.achieved_error <= trunc.epsilon || (last_chance && n == avail)) {
        if (cancel != nullptr) cancel->cancel();
        if (stats != nullptr) *stats = local_stats;
        return out;
      }
    }

    // Not enough converged vectors for the tolerance: widen and continue from
    // the current Ritz block.
    p.nsv += p.block_cols;
    p.rank += p.block_cols;
    p.k += p.block_cols;
    clamp_sizes();
  }
}

}  // namespace romflow
