#include "romflow/ecm.hpp"

#include "romflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace romflow {

namespace {

Dense augment(const Dense& g) {
  const Index n = g.rows();
  Dense gh(n, g.cols() + 1);
  gh.leftCols(g.cols()) = g;
  gh.col(g.cols()).setConstant(g.norm() / std::sqrt(static_cast<double>(n)));
  return gh;
}

Vector reference(const Vector* w, Index n) {
  if (w == nullptr) return Vector::Ones(n);
  if (w->size() != n) throw std::invalid_argument("reference weights do not match the number of elements");
  return *w;
}

void check_rule(const CubatureRule& rule, Index n) {
  if (rule.elements.size() != rule.weights.size()) {
    throw std::invalid_argument("cubature rule has mismatched element and weight counts");
  }
  for (Index e : rule.elements) {
    if (e < 0 || e >= n) throw IndexError("cubature element " + std::to_string(e) + " outside [0, " + std::to_string(n) + ")");
  }
}

}  // namespace

CubatureRule full_rule(Index n_elements) {
  CubatureRule r;
  r.elements.resize(static_cast<std::size_t>(n_elements));
  std::iota(r.elements.begin(), r.elements.end(), Index{0});
  r.weights.assign(static_cast<std::size_t>(n_elements), 1.0);
  return r;
}

CubatureRule ecm(const Dense& g, const Vector* initial_weights, double tol, const EcmOptions& opt, EcmStats* stats) {
  const Index n = g.rows();
  if (n == 0) throw std::invalid_argument("ecm: G has no rows");
  if (!(tol >= 0.0)) throw std::invalid_argument("ecm: tolerance must be non-negative");
  const Vector w0 = reference(initial_weights, n);
  const Dense gh = augment(g);
  const Vector b = gh.transpose() * w0;
  const double nb = b.norm();

  const Vector row_norm = g.rowwise().norm();
  const Vector row_norm_h = gh.rowwise().norm();
  const double floor = opt.candidate_floor * row_norm.maxCoeff();
  std::vector<bool> blocked(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    if (!(row_norm(i) >= floor) || row_norm_h(i) == 0.0) blocked[static_cast<std::size_t>(i)] = true;
  }
  const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(5 * n);

  std::vector<Index> sel;
  Vector w;
  Vector r = b;
  int it = 0;
  auto rel = [&](const Vector& res) { return nb > 0.0 ? res.norm() / nb : res.norm(); };

  while (rel(r) > tol && it < max_iter) {
    ++it;
    const Vector score = gh * r;
    Index best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (blocked[static_cast<std::size_t>(i)]) continue;
      if (std::find(sel.begin(), sel.end(), i) != sel.end()) continue;
      const double s = score(i) / row_norm_h(i);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (best < 0) break;
    sel.push_back(best);

    Dense a(gh.cols(), static_cast<Index>(sel.size()));
    for (std::size_t k = 0; k < sel.size(); ++k) a.col(static_cast<Index>(k)) = gh.row(sel[k]).transpose();
    const NnlsResult fit = nnls(a, b);

    std::vector<Index> kept;
    std::vector<double> kept_w;
    for (std::size_t k = 0; k < sel.size(); ++k) {
      const double x = fit.x(static_cast<Index>(k));
      if (x > 0.0) {
        kept.push_back(sel[k]);
        kept_w.push_back(x);
      } else if (sel[k] == best) {
        blocked[static_cast<std::size_t>(best)] = true;
      }
    }
    sel = std::move(kept);
    w = Eigen::Map<const Vector>(kept_w.data(), static_cast<Index>(kept_w.size()));
    r = b;
    for (std::size_t k = 0; k < sel.size(); ++k) r -= w(static_cast<Index>(k)) * gh.row(sel[k]).transpose();
  }
  if (stats != nullptr) stats->iterations = it;

  std::vector<std::size_t> order(sel.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sel[i] < sel[j]; });
  CubatureRule rule;
  rule.tolerance = tol;
  rule.achieved_error = rel(r);
  for (std::size_t k : order) {
    rule.elements.push_back(sel[k]);
    rule.weights.push_back(w(static_cast<Index>(k)));
  }
  if (rule.achieved_error > tol) {
    throw EcmFailure("ecm: integration error " + std::to_string(rule.achieved_error) + " above tolerance after " +
                         std::to_string(it) + " iterations",
                     std::move(rule));
  }
  return rule;
}

double integration_error(const Dense& g, const CubatureRule& rule, const Vector* reference_weights) {
  const Index n = g.rows();
  check_rule(rule, n);
  const Vector w0 = reference(reference_weights, n);
  const Dense gh = augment(g);
  const Vector b = gh.transpose() * w0;
  Vector approx = Vector::Zero(gh.cols());
  for (std::size_t k = 0; k < rule.elements.size(); ++k) {
    approx += rule.weights[k] * gh.row(rule.elements[k]).transpose();
  }
  return (approx - b).norm() / b.norm();
}

double integration_error(const BlockedMatrix& s, const CubatureRule& rule, const Vector* reference_weights) {
  const Index n = s.rows();
  check_rule(rule, n);
  const Vector w0 = reference(reference_weights, n);
  const double c = frobenius_norm(s) / std::sqrt(static_cast<double>(n));
  const BlockShape col_shape(s.block_shape().rows_per_block, 1);

  Vector b(s.cols() + 1);
  b.head(s.cols()) = transpose_matmul_dense(s, BlockedMatrix::from_dense(w0, col_shape)).col(0);
  b(s.cols()) = c * w0.sum();

  // select_rows needs increasing indices; duplicate-free rules are sorted.
  std::vector<std::size_t> order(rule.elements.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return rule.elements[i] < rule.elements[j]; });
  std::vector<Index> idx;
  Vector w(static_cast<Index>(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    idx.push_back(rule.elements[order[k]]);
    w(static_cast<Index>(k)) = rule.weights[order[k]];
  }
  Vector approx(s.cols() + 1);
  if (idx.empty()) {
    approx.setZero();
  } else {
    const BlockedMatrix se = select_rows(s, idx);
    approx.head(s.cols()) = transpose_matmul_dense(se, BlockedMatrix::from_dense(w, col_shape)).col(0);
    approx(s.cols()) = c * w.sum();
  }
  return (approx - b).norm() / b.norm();
}

LocalToGlobal local_to_global(const std::vector<Index>& local_indices, const std::vector<double>& local_weights,
                              ElementRange range) {
  if (local_indices.size() != local_weights.size()) {
    throw std::invalid_argument("local_to_global: index and weight counts differ");
  }
  LocalToGlobal out;
  out.weights = local_weights;
  out.indices.reserve(local_indices.size());
  for (Index l : local_indices) {
    if (l < 0 || l >= range.size()) {
      throw IndexError("local index " + std::to_string(l) + " outside partition of size " + std::to_string(range.size()));
    }
    out.indices.push_back(range.begin + l);
  }
  return out;
}

}  // namespace romflow
