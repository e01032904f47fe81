#include "romflow/svd.hpp"

#include "romflow/errors.hpp"

#include <Eigen/QR>

#include <string>
#include <utility>

namespace romflow {

namespace {

struct Panel {
  Index first_row;
  Index rows;
};

// Consecutive block-rows are merged until each panel is at least as tall as
// it is wide; a short remainder joins the previous panel.
std::vector<Panel> merge_panels(const BlockedMatrix& a) {
  std::vector<Panel> panels;
  Panel cur{0, 0};
  for (Index bi = 0; bi < a.grid().block_rows; ++bi) {
    cur.rows += a.block_row_size(bi);
    if (cur.rows >= a.cols()) {
      panels.push_back(cur);
      cur = Panel{cur.first_row + cur.rows, 0};
    }
  }
  if (cur.rows > 0) {
    if (panels.empty()) {
      panels.push_back(cur);
    } else {
      panels.back().rows += cur.rows;
    }
  }
  return panels;
}

// Thin QR; signs are fixed by the caller.
std::pair<Dense, Dense> thin_qr(const Dense& m) {
  const Index n = m.cols();
  Eigen::HouseholderQR<Dense> qr(m);
  Dense q = qr.householderQ() * Dense::Identity(m.rows(), n);
  Dense r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  return {std::move(q), std::move(r)};
}

}  // namespace

TsqrResult tsqr(const BlockedMatrix& a) {
  if (a.empty()) throw std::invalid_argument("tsqr: empty matrix");
  if (a.rows() < a.cols()) {
    throw std::invalid_argument("tsqr: matrix is wide (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ")");
  }
  const Index n = a.cols();
  const std::vector<Panel> panels = merge_panels(a);
  const Index np = static_cast<Index>(panels.size());

  std::vector<Dense> leaf_q(panels.size());
  std::vector<Dense> rs(panels.size());
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < np; ++p) {
    const auto& pan = panels[static_cast<std::size_t>(p)];
    auto [q, r] = thin_qr(a.row_range(pan.first_row, pan.rows));
    leaf_q[static_cast<std::size_t>(p)] = std::move(q);
    rs[static_cast<std::size_t>(p)] = std::move(r);
  }

  // Pairwise reduction. tree[l][i] is the 2n x n (or n x n pass-through) Q
  // factor of node i at level l; empty means identity.
  std::vector<std::vector<Dense>> tree;
  while (rs.size() > 1) {
    const Index pairs = static_cast<Index>(rs.size() / 2);
    std::vector<Dense> level_q(rs.size() / 2 + rs.size() % 2);
    std::vector<Dense> next_r(level_q.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < pairs; ++i) {
      Dense stacked(2 * n, n);
      stacked.topRows(n) = rs[static_cast<std::size_t>(2 * i)];
      stacked.bottomRows(n) = rs[static_cast<std::size_t>(2 * i + 1)];
      auto [q, r] = thin_qr(stacked);
      level_q[static_cast<std::size_t>(i)] = std::move(q);
      next_r[static_cast<std::size_t>(i)] = std::move(r);
    }
    if (rs.size() % 2 == 1) next_r.back() = rs.back();
    tree.push_back(std::move(level_q));
    rs = std::move(next_r);
  }

  Dense r = rs.front();
  Dense d = Dense::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) {
      d(i, i) = -1.0;
      r.row(i) *= -1.0;
    }
  }

  // Push the small factors down the tree: each node's coefficient C becomes
  // Q_node * C split among its children.
  std::vector<Dense> coeff{d};
  for (auto level = tree.rbegin(); level != tree.rend(); ++level) {
    const std::size_t width = level->size();
    std::vector<Dense> child;
    child.reserve(2 * width);
    for (std::size_t i = 0; i < width; ++i) {
      const Dense& qn = (*level)[i];
      if (qn.size() == 0) {
        child.push_back(coeff[i]);
      } else {
        const Dense c = qn * coeff[i];
        child.push_back(c.topRows(n));
        child.push_back(c.bottomRows(n));
      }
    }
    coeff = std::move(child);
  }

  BlockedMatrix q(a.rows(), n, a.block_shape());
#pragma omp parallel for schedule(static)
  for (Index p = 0; p < np; ++p) {
    const auto i = static_cast<std::size_t>(p);
    q.set_rows(panels[i].first_row, leaf_q[i] * coeff[i]);
  }
  return {std::move(q), std::move(r)};
}

BlockedMatrix orthonormalize_against(const BlockedMatrix* q, const BlockedMatrix& y_in, double drop_tol) {
  const bool have_q = q != nullptr && !q->empty();
  Index limit = y_in.rows() - (have_q ? q->cols() : 0);
  if (limit <= 0) return {};

  auto project_out = [&](const BlockedMatrix& y) {
    if (!have_q) return y;
    BlockedMatrix z = sub(y, matmul(*q, transpose_matmul_dense(*q, y)));
    return sub(z, matmul(*q, transpose_matmul_dense(*q, z)));
  };

  Dense y = y_in.to_dense();
  Vector ref = y.colwise().norm().transpose();
  std::vector<Index> keep;
  for (Index j = 0; j < y.cols(); ++j) {
    if (ref(j) > 0.0) keep.push_back(j);
  }

  while (!keep.empty()) {
    if (static_cast<Index>(keep.size()) > limit) keep.resize(static_cast<std::size_t>(limit));
    Dense sel(y.rows(), static_cast<Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) sel.col(static_cast<Index>(c)) = y.col(keep[c]);
    const BlockedMatrix z = project_out(BlockedMatrix::from_dense(sel, y_in.block_shape()));
    TsqrResult qr = tsqr(z);

    std::vector<Index> survivors;
    for (std::size_t c = 0; c < keep.size(); ++c) {
      const Index ci = static_cast<Index>(c);
      if (std::abs(qr.r(ci, ci)) > drop_tol * ref(keep[c])) survivors.push_back(keep[c]);
    }
    if (survivors.size() == keep.size()) {
      if (!have_q) return std::move(qr.q);
      // One more pass guards against loss of orthogonality when the
      // projected part is small compared to the input.
      return tsqr(project_out(qr.q)).q;
    }
    keep = std::move(survivors);
  }
  return {};
}

}  // namespace romflow
