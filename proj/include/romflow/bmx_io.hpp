#pragma once

// BMX1 blocked-matrix file format.
//
//   offset 0   magic "BMX1" (4 bytes)
//   offset 4   global_rows, global_cols, rows_per_block, cols_per_block
//              (uint64, little-endian)
//   offset 36  blocks in grid row-major order; each block is its
//              rows x cols values as little-endian IEEE-754 doubles,
//              column-major. Edge blocks carry only their actual extent.

#include "romflow/blocks.hpp"

#include <filesystem>

namespace romflow {

void write_bmx(const std::filesystem::path& path, const BlockedMatrix& m);
BlockedMatrix read_bmx(const std::filesystem::path& path);

/// Plain CSV dump (one matrix row per line, 17 significant digits).
void write_csv(const std::filesystem::path& path, const BlockedMatrix& m);

}  // namespace romflow
