#include "romflow/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace romflow {

namespace {

Vector solve_passive(const Dense& a, const Vector& b, const std::vector<Index>& passive) {
  Dense ap(a.rows(), static_cast<Index>(passive.size()));
  for (std::size_t k = 0; k < passive.size(); ++k) ap.col(static_cast<Index>(k)) = a.col(passive[k]);
  return ap.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(const Dense& a, const Vector& b, int max_iterations) {
  if (a.rows() != b.size()) throw std::invalid_argument("nnls: A and b have different row counts");
  const Index n = a.cols();
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * std::max<Index>(n, 1));

  NnlsResult out;
  out.x = Vector::Zero(n);
  if (n == 0) {
    out.residual_norm = b.norm();
    return out;
  }
  std::vector<bool> in_passive(static_cast<std::size_t>(n), false);
  std::vector<Index> passive;
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.cwiseAbs().colwise().sum().maxCoeff() *
                     static_cast<double>(std::max(a.rows(), n));

  Vector& x = out.x;
  Vector w = a.transpose() * (b - a * x);
  while (out.iterations < max_iterations) {
    Index t = -1;
    double best = tol;
    for (Index j = 0; j < n; ++j) {
      if (!in_passive[static_cast<std::size_t>(j)] && w(j) > best) {
        best = w(j);
        t = j;
      }
    }
    if (t < 0) break;
    ++out.iterations;
    in_passive[static_cast<std::size_t>(t)] = true;
    passive.push_back(t);
    std::sort(passive.begin(), passive.end());

    for (;;) {
      const Vector s = solve_passive(a, b, passive);
      bool feasible = true;
      for (Index k = 0; k < s.size(); ++k) feasible = feasible && s(k) > 0.0;
      if (feasible) {
        for (std::size_t k = 0; k < passive.size(); ++k) x(passive[k]) = s(static_cast<Index>(k));
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      Index blocking = -1;
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const double sk = s(static_cast<Index>(k));
        const double xk = x(passive[k]);
        if (sk <= 0.0 && xk / (xk - sk) < alpha) {
          alpha = xk / (xk - sk);
          blocking = passive[k];
        }
      }
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const Index j = passive[k];
        x(j) += alpha * (s(static_cast<Index>(k)) - x(j));
      }
      x(blocking) = 0.0;
      std::vector<Index> kept;
      for (Index j : passive) {
        if (x(j) > 0.0) {
          kept.push_back(j);
        } else {
          x(j) = 0.0;
          in_passive[static_cast<std::size_t>(j)] = false;
        }
      }
      passive = std::move(kept);
      if (passive.empty()) break;
    }
    w = a.transpose() * (b - a * x);
  }
  out.residual_norm = (b - a * x).norm();
  return out;
}

}  // namespace romflow
