#include "romflow/workflow.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>

namespace romflow {

std::vector<SvdBenchRow> bench_svd(const BlockedMatrix& a, const TruncationSpec& truncation,
                                   const std::vector<int>& workers, int repeats) {
  if (repeats < 1) throw std::invalid_argument("bench_svd: repeats must be at least 1");
  std::vector<SvdBenchRow> rows;
  const int before = omp_get_max_threads();
  for (SvdAlgorithm alg : {SvdAlgorithm::full_tsqr, SvdAlgorithm::randomized, SvdAlgorithm::lanczos}) {
    SvdSettings s;
    s.algorithm = alg;
    s.truncation = truncation;
    for (int w : workers) {
      if (w < 1) throw std::invalid_argument("bench_svd: worker counts must be positive");
      omp_set_num_threads(w);
      SvdBenchRow row{to_string(alg), w, std::numeric_limits<double>::infinity(), 0};
      for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const Basis b = compute_basis(a, s);
        row.seconds = std::min(row.seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        row.rank = b.size();
      }
      rows.push_back(row);
    }
  }
  omp_set_num_threads(before);
  return rows;
}

void write_bench_csv(const std::filesystem::path& path, const std::vector<SvdBenchRow>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f.precision(17);
  f << "algorithm,workers,seconds,rank\n";
  for (const auto& r : rows) f << r.algorithm << ',' << r.workers << ',' << r.seconds << ',' << r.rank << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace romflow
