#include "romflow/random.hpp"

#include <cmath>
#include <numbers>

namespace romflow {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0, 1): 53 random bits, offset by half an ulp so log() is finite.
double to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  const std::uint64_t a = splitmix64(key ^ (2 * index));
  const std::uint64_t b = splitmix64(key ^ (2 * index + 1));
  // Box-Muller, cosine branch only.
  return std::sqrt(-2.0 * std::log(to_unit(a))) * std::cos(2.0 * std::numbers::pi * to_unit(b));
}

Dense gaussian_matrix(Index rows, Index cols, std::uint64_t seed, Index first_col) {
  Dense out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      out(i, j) = counter_gaussian(seed, static_cast<std::uint64_t>(first_col + j),
                                   static_cast<std::uint64_t>(i));
    }
  }
  return out;
}

}  // namespace romflow
