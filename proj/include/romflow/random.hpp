#pragma once

// Counter-based Gaussian numbers: entry (row, col) of a test matrix is a pure
// function of (seed, col, row), so any block of columns can be generated
// independently and in any order with identical results.

#include "romflow/blocks.hpp"

#include <cstdint>

namespace romflow {

double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// rows x cols standard-normal matrix whose column j uses stream first_col + j.
Dense gaussian_matrix(Index rows, Index cols, std::uint64_t seed, Index first_col = 0);

}  // namespace romflow
