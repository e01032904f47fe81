#include "romflow/fom.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>

namespace romflow {

namespace {

double thin_plate(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

}  // namespace

Dense pod_rbf_interpolate(const Dense& training_fields, const std::vector<std::vector<double>>& training_params,
                          const std::vector<double>& query, double pod_tol) {
  const Index m = training_fields.cols();
  if (m < 2) throw std::invalid_argument("pod_rbf_interpolate: need at least two training fields");
  if (static_cast<Index>(training_params.size()) != m) {
    throw ShapeError("pod_rbf_interpolate: one parameter vector per training field required");
  }
  const Index dim = static_cast<Index>(query.size());
  for (const auto& mu : training_params) {
    if (static_cast<Index>(mu.size()) != dim) throw ShapeError("pod_rbf_interpolate: parameter dimension mismatch");
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      if (training_params[static_cast<std::size_t>(i)] == training_params[static_cast<std::size_t>(j)]) {
        throw std::invalid_argument("pod_rbf_interpolate: duplicate training parameters");
      }
    }
  }

  Eigen::BDCSVD<Dense> svd(training_fields, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Index r = 1;
  while (r < s.size() && s(r) > pod_tol * s(0)) ++r;
  const Dense modes = svd.matrixU().leftCols(r);
  const Dense coeffs = modes.transpose() * training_fields;  // r x m

  auto point = [&](Index i) {
    return Eigen::Map<const Vector>(training_params[static_cast<std::size_t>(i)].data(), dim);
  };
  const Eigen::Map<const Vector> q(query.data(), dim);

  // [Phi P; P^T 0] [w; c] = [coeffs^T; 0] with P = [1, mu].
  const Index np = dim + 1;
  Dense sys = Dense::Zero(m + np, m + np);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) sys(i, j) = thin_plate((point(i) - point(j)).norm());
    sys(i, m) = 1.0;
    sys.block(i, m + 1, 1, dim) = point(i).transpose();
  }
  sys.bottomLeftCorner(np, m) = sys.topRightCorner(m, np).transpose();
  Dense rhs = Dense::Zero(m + np, r);
  rhs.topRows(m) = coeffs.transpose();
  const Dense sol = Eigen::CompleteOrthogonalDecomposition<Dense>(sys).solve(rhs);

  Vector basis(m + np);
  for (Index j = 0; j < m; ++j) basis(j) = thin_plate((q - point(j)).norm());
  basis(m) = 1.0;
  basis.tail(dim) = q;
  const Vector c = sol.transpose() * basis;
  return modes * c;
}

}  // namespace romflow
