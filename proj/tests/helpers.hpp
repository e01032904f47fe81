#pragma once

#include "romflow/blocks.hpp"

#include <omp.h>

#include <random>

namespace testing {

using romflow::Dense;
using romflow::Index;

inline Dense random_dense(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Dense m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
  }
  return m;
}

inline double rel_diff(const Dense& a, const Dense& b) {
  const double nb = b.norm();
  return nb == 0.0 ? a.norm() : (a - b).norm() / nb;
}

/// Runs fn with the OpenMP team size pinned to n, restoring the previous value.
template <class Fn>
auto with_threads(int n, Fn&& fn) {
  const int before = omp_get_max_threads();
  omp_set_num_threads(n);
  auto result = fn();
  omp_set_num_threads(before);
  return result;
}

}  // namespace testing
