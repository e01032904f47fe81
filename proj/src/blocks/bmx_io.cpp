#include "romflow/bmx_io.hpp"

#include "romflow/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace romflow {

namespace {

constexpr std::array<char, 4> kMagic = {'B', 'M', 'X', '1'};

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

void put_u64(std::ostream& os, std::uint64_t v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return to_le(v);
}

void put_doubles(std::ostream& os, const double* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) put_u64(os, std::bit_cast<std::uint64_t>(data[i]));
  }
}

void get_doubles(std::istream& is, double* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<double>(get_u64(is));
  }
}

}  // namespace

void write_bmx(const std::filesystem::path& path, const BlockedMatrix& m) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put_u64(os, static_cast<std::uint64_t>(m.rows()));
  put_u64(os, static_cast<std::uint64_t>(m.cols()));
  put_u64(os, static_cast<std::uint64_t>(m.block_shape().rows_per_block));
  put_u64(os, static_cast<std::uint64_t>(m.block_shape().cols_per_block));
  for (Index bi = 0; bi < m.grid().block_rows; ++bi) {
    for (Index bj = 0; bj < m.grid().block_cols; ++bj) {
      const Dense& b = m.block(bi, bj);
      put_doubles(os, b.data(), static_cast<std::size_t>(b.size()));
    }
  }
  if (!os) throw IoError("write failed for " + path.string());
}

BlockedMatrix read_bmx(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw IoError(path.string() + " is not a BMX1 file");
  const auto rows = static_cast<Index>(get_u64(is));
  const auto cols = static_cast<Index>(get_u64(is));
  const auto rpb = static_cast<Index>(get_u64(is));
  const auto cpb = static_cast<Index>(get_u64(is));
  if (!is) throw IoError(path.string() + ": truncated header");
  if (rows < 1 || cols < 1 || rpb < 1 || cpb < 1) throw IoError(path.string() + ": invalid header");
  BlockedMatrix m(rows, cols, BlockShape(rpb, cpb));
  for (Index bi = 0; bi < m.grid().block_rows; ++bi) {
    for (Index bj = 0; bj < m.grid().block_cols; ++bj) {
      Dense& b = m.block(bi, bj);
      get_doubles(is, b.data(), static_cast<std::size_t>(b.size()));
    }
  }
  if (!is) throw IoError(path.string() + ": truncated block data");
  return m;
}

void write_csv(const std::filesystem::path& path, const BlockedMatrix& m) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  for (Index r = 0; r < m.rows(); ++r) {
    const Dense row = m.row_range(r, 1);
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << row(0, c);
    }
    os << '\n';
  }
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace romflow
