#include "romflow/workflow.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

namespace romflow {

Evaluation evaluate_hrom(const std::filesystem::path& model_dir, const ParamPoint& mu, const Schedule& schedule) {
  for (const char* name : {"config.json", "basis.bmx", "rule.txt"}) {
    if (!std::filesystem::exists(model_dir / name)) throw IoError("missing artifact " + (model_dir / name).string());
  }
  const WorkflowConfig cfg = load_config(model_dir / "config.json");
  const FomProblem problem = FomProblem::desk(cfg.problem);
  const ReducedModel rom(problem, load_basis(model_dir / "basis.bmx"));
  const HromModel hrom{&rom, load_rule(model_dir / "rule.txt")};

  const auto t0 = std::chrono::steady_clock::now();
  Evaluation ev;
  ev.solution = solve_hrom(hrom, mu, schedule, HromMode::full_projection);
  ev.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return ev;
}

void write_mean_temperature(const std::filesystem::path& path, const std::vector<double>& mean) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f.precision(17);
  f << "step,mean_temperature\n";
  for (std::size_t i = 0; i < mean.size(); ++i) f << i << ',' << mean[i] << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

Schedule parse_schedule(const std::string& text) {
  Schedule out;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ',')) {
    std::stringstream parts(item);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(parts, field, ':')) fields.push_back(field);
    Phase ph;
    try {
      if (fields.size() != 1 && fields.size() != 3) throw std::invalid_argument("");
      std::size_t used = 0;
      ph.steps = std::stol(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("");
      if (fields.size() == 3) {
        ph.source_factor = std::stod(fields[1]);
        ph.flow_factor = std::stod(fields[2]);
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("schedule phase '" + item + "' is not steps[:source:flow]");
    }
    if (ph.steps < 1) throw std::invalid_argument("schedule phase '" + item + "' needs at least one step");
    out.push_back(ph);
  }
  if (out.empty()) throw std::invalid_argument("empty schedule");
  return out;
}

}  // namespace romflow
