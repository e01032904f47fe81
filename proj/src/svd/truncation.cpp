#include "romflow/svd.hpp"

#include <cmath>
#include <stdexcept>

namespace romflow {

TruncationSpec TruncationSpec::tolerance(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("truncation tolerance must lie in [0, 1]");
  }
  TruncationSpec t;
  t.mode = Mode::tolerance;
  t.epsilon = eps;
  t.rank = 0;
  return t;
}

TruncationSpec TruncationSpec::fixed_rank(Index rank) {
  if (rank < 1) throw std::invalid_argument("fixed rank must be positive");
  TruncationSpec t;
  t.mode = Mode::fixed_rank;
  t.epsilon = 0.0;
  t.rank = rank;
  return t;
}

Index tolerance_rank(std::span<const double> sigma, double eps, double total_sq, double floor_sq) {
  const Index n = static_cast<Index>(sigma.size());
  std::vector<double> tail(static_cast<std::size_t>(n) + 1, 0.0);
  for (Index i = n - 1; i >= 0; --i) {
    tail[static_cast<std::size_t>(i)] = tail[static_cast<std::size_t>(i) + 1] + sigma[i] * sigma[i];
  }
  const double bound = eps * eps * total_sq;
  for (Index k = 1; k <= n; ++k) {
    if (tail[static_cast<std::size_t>(k)] + floor_sq <= bound) return k;
  }
  return n + 1;
}

double projection_error(const BlockedMatrix& u, const BlockedMatrix& a) {
  const double norm_a = frobenius_norm(a);
  if (norm_a == 0.0) return 0.0;
  const Dense coeffs = transpose_matmul_dense(u, a);
  const BlockedMatrix residual = sub(a, matmul(u, coeffs));
  return frobenius_norm(residual) / norm_a;
}

double orthonormality_defect(const BlockedMatrix& u) {
  const Dense gram = transpose_matmul_dense(u, u);
  return (gram - Dense::Identity(gram.rows(), gram.cols())).norm();
}

BlockedMatrix normalize_column_signs(const BlockedMatrix& u) {
  BlockedMatrix out = u;
  for (Index bj = 0; bj < u.grid().block_cols; ++bj) {
    const Index nc = u.block_col_size(bj);
    for (Index c = 0; c < nc; ++c) {
      double best = -1.0;
      double sign = 1.0;
      for (Index bi = 0; bi < u.grid().block_rows; ++bi) {
        const auto col = u.block(bi, bj).col(c);
        for (Index r = 0; r < col.size(); ++r) {
          if (std::abs(col(r)) > best) {
            best = std::abs(col(r));
            sign = col(r) < 0.0 ? -1.0 : 1.0;
          }
        }
      }
      if (sign < 0.0) {
        for (Index bi = 0; bi < u.grid().block_rows; ++bi) out.block(bi, bj).col(c) *= -1.0;
      }
    }
  }
  return out;
}

void LanczosParams::validate() const {
  if (nsv < 1 || rank < nsv || k < rank) {
    throw std::invalid_argument("lanczos parameters need 1 <= nsv <= rank <= k");
  }
  if (block_cols < 1) throw std::invalid_argument("lanczos block_cols must be positive");
  if (!(convergence_tol > 0.0)) throw std::invalid_argument("lanczos convergence_tol must be positive");
  if (max_outer_iterations < 1) throw std::invalid_argument("lanczos max_outer_iterations must be positive");
}

SvdAlgorithm parse_svd_algorithm(const std::string& name) {
  if (name == "full_tsqr" || name == "full") return SvdAlgorithm::full_tsqr;
  if (name == "randomized") return SvdAlgorithm::randomized;
  if (name == "lanczos") return SvdAlgorithm::lanczos;
  throw std::invalid_argument("unknown svd algorithm '" + name + "'");
}

std::string to_string(SvdAlgorithm algorithm) {
  switch (algorithm) {
    case SvdAlgorithm::full_tsqr: return "full_tsqr";
    case SvdAlgorithm::randomized: return "randomized";
    case SvdAlgorithm::lanczos: return "lanczos";
  }
  return "unknown";
}

Basis compute_basis(const BlockedMatrix& a, const SvdSettings& settings) {
  switch (settings.algorithm) {
    case SvdAlgorithm::full_tsqr: return full_svd(a, settings.truncation);
    case SvdAlgorithm::randomized: return randomized_svd(a, settings.truncation, settings.randomized);
    case SvdAlgorithm::lanczos: return lanczos_svd(a, settings.lanczos, settings.truncation);
  }
  throw std::invalid_argument("unknown svd algorithm");
}

}  // namespace romflow
