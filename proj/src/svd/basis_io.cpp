#include "romflow/svd.hpp"

#include "romflow/bmx_io.hpp"
#include "romflow/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace romflow {

std::filesystem::path basis_sidecar_path(const std::filesystem::path& bmx_path) {
  std::filesystem::path p = bmx_path;
  p += ".json";
  return p;
}

void save_basis(const std::filesystem::path& bmx_path, const Basis& basis) {
  write_bmx(bmx_path, basis.vectors);
  nlohmann::json meta;
  const bool tol = basis.truncation.mode == TruncationSpec::Mode::tolerance;
  meta["mode"] = tol ? "tolerance" : "fixed_rank";
  if (tol) {
    meta["epsilon"] = basis.truncation.epsilon;
  } else {
    meta["rank"] = basis.truncation.rank;
  }
  meta["achieved_error"] = basis.achieved_error;
  meta["singular_values"] = basis.singular_values;
  const auto side = basis_sidecar_path(bmx_path);
  std::ofstream out(side);
  if (!out) throw IoError("cannot write " + side.string());
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + side.string());
}

Basis load_basis(const std::filesystem::path& bmx_path) {
  Basis basis;
  basis.vectors = read_bmx(bmx_path);
  const auto side = basis_sidecar_path(bmx_path);
  std::ifstream in(side);
  if (!in) throw IoError("missing basis metadata " + side.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
    if (meta.at("mode").get<std::string>() == "tolerance") {
      basis.truncation = TruncationSpec::tolerance(meta.at("epsilon").get<double>());
    } else {
      basis.truncation = TruncationSpec::fixed_rank(meta.at("rank").get<Index>());
    }
    basis.achieved_error = meta.at("achieved_error").get<double>();
    basis.singular_values = meta.at("singular_values").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed basis metadata " + side.string() + ": " + e.what());
  }
  if (static_cast<Index>(basis.singular_values.size()) != basis.vectors.cols()) {
    throw IoError("basis metadata " + side.string() + " does not match " + bmx_path.string());
  }
  return basis;
}

}  // namespace romflow
