#include "romflow/galerkin.hpp"

#include "romflow/errors.hpp"

namespace romflow {

double relative_error(const BlockedMatrix& a, const BlockedMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("relative_error: shapes differ");
  const double nb = frobenius_norm(b);
  if (nb == 0.0) throw std::invalid_argument("relative_error: reference has zero norm");
  return frobenius_norm(sub(a, b)) / nb;
}

}  // namespace romflow
