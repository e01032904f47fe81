#include "romflow/fom.hpp"

#include <algorithm>
#include <string>

namespace romflow {

std::array<Index, 3> Mesh::element_dofs(Index e) const {
  if (e < 0 || e >= n_elements()) {
    throw IndexError("element " + std::to_string(e) + " outside [0, " + std::to_string(n_elements()) + ")");
  }
  const auto& el = elements[static_cast<std::size_t>(e)];
  return {node_dof[static_cast<std::size_t>(el[0])], node_dof[static_cast<std::size_t>(el[1])],
          node_dof[static_cast<std::size_t>(el[2])]};
}

Mesh Mesh::from_parts(std::vector<Point> nodes, std::vector<std::array<Index, 3>> elements,
                      std::vector<Index> dirichlet_nodes) {
  if (elements.empty()) throw std::invalid_argument("mesh needs at least one element");
  const Index nn = static_cast<Index>(nodes.size());
  for (auto& el : elements) {
    for (Index v : el) {
      if (v < 0 || v >= nn) throw IndexError("element references node " + std::to_string(v));
    }
    const Point& a = nodes[static_cast<std::size_t>(el[0])];
    const Point& b = nodes[static_cast<std::size_t>(el[1])];
    const Point& c = nodes[static_cast<std::size_t>(el[2])];
    const double twice_area = (b - a).x() * (c - a).y() - (c - a).x() * (b - a).y();
    if (twice_area == 0.0) throw std::invalid_argument("degenerate element");
    if (twice_area < 0.0) std::swap(el[1], el[2]);
  }
  std::sort(dirichlet_nodes.begin(), dirichlet_nodes.end());
  dirichlet_nodes.erase(std::unique(dirichlet_nodes.begin(), dirichlet_nodes.end()), dirichlet_nodes.end());

  Mesh m;
  m.node_dof.assign(nodes.size(), 0);
  for (Index v : dirichlet_nodes) {
    if (v < 0 || v >= nn) throw IndexError("dirichlet node " + std::to_string(v) + " out of range");
    m.node_dof[static_cast<std::size_t>(v)] = -1;
  }
  for (auto& d : m.node_dof) d = d < 0 ? -1 : m.n_dofs++;
  m.nodes = std::move(nodes);
  m.elements = std::move(elements);
  m.dirichlet_nodes = std::move(dirichlet_nodes);
  return m;
}

Mesh Mesh::unit_square(Index n) {
  if (n < 1) throw std::invalid_argument("unit_square: n must be positive");
  const Index side = n + 1;
  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>(side * side));
  std::vector<Index> boundary;
  for (Index j = 0; j <= n; ++j) {
    for (Index i = 0; i <= n; ++i) {
      nodes.emplace_back(static_cast<double>(i) / static_cast<double>(n), static_cast<double>(j) / static_cast<double>(n));
      if (i == 0 || j == 0 || i == n || j == n) boundary.push_back(j * side + i);
    }
  }
  std::vector<std::array<Index, 3>> elements;
  elements.reserve(static_cast<std::size_t>(2 * n * n));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const Index a = j * side + i;
      const Index b = a + 1;
      const Index c = a + side;
      const Index d = c + 1;
      elements.push_back({a, b, d});
      elements.push_back({a, d, c});
    }
  }
  return from_parts(std::move(nodes), std::move(elements), std::move(boundary));
}

}  // namespace romflow
