#include "romflow/ecm.hpp"

#include "romflow/errors.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace romflow {

void save_rule(const std::filesystem::path& path, const CubatureRule& rule) {
  if (rule.elements.size() != rule.weights.size()) throw std::invalid_argument("save_rule: mismatched rule");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  out << rule.elements.size() << ' ' << rule.achieved_error << ' ' << rule.tolerance << '\n';
  for (std::size_t k = 0; k < rule.elements.size(); ++k) out << rule.elements[k] << ' ' << rule.weights[k] << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

CubatureRule load_rule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  std::istringstream header(line);
  long long count = -1;
  CubatureRule rule;
  if (!(header >> count >> rule.achieved_error >> rule.tolerance) || count < 0) {
    throw IoError(path.string() + ": malformed header");
  }
  for (long long k = 0; k < count; ++k) {
    if (!std::getline(in, line)) throw IoError(path.string() + ": expected " + std::to_string(count) + " entries");
    std::istringstream row(line);
    long long e = 0;
    double w = 0.0;
    if (!(row >> e >> w)) throw IoError(path.string() + ": malformed line " + std::to_string(k + 2));
    rule.elements.push_back(static_cast<Index>(e));
    rule.weights.push_back(w);
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw IoError(path.string() + ": trailing data");
  }
  return rule;
}

}  // namespace romflow
