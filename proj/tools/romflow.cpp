// romflow command line: training pipeline, single stages, verification,
// online HROM evaluation and the SVD scaling table.

#include "romflow/bmx_io.hpp"
#include "romflow/workflow.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

using namespace romflow;

namespace {

struct Common {
  std::string config;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "workflow config (JSON); desk defaults if omitted");
  app->add_option("--workers", c.workers, "worker count")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--out", c.out, "output directory");
}

WorkflowConfig resolve(const Common& c) {
  WorkflowConfig cfg = c.config.empty() ? desk_config() : load_config(c.config);
  apply_environment(cfg);
  if (c.workers) cfg.workers = *c.workers;
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

void print(const RunReport& r) {
  for (const auto& s : r.stages) std::cout << s.stage << "  " << s.wall_seconds << " s  " << s.shape << '\n';
  if (r.n_modes > 0) std::cout << "basis size N = " << r.n_modes << '\n';
  if (r.rule_size > 0) {
    std::cout << "reduced mesh |E| = " << r.rule_size << " of " << r.n_elements << " (ratio " << r.element_ratio()
              << ")\n";
  }
  if (r.verification1) {
    std::cout << "verification 1 = " << *r.verification1 << " (gate " << r.gate1 << ", "
              << (r.gate1_passed() ? "pass" : "FAIL") << ")\n";
  }
  if (r.verification2) {
    std::cout << "verification 2 = " << *r.verification2 << " (gate " << r.gate2 << ", "
              << (r.gate2_passed() ? "pass" : "FAIL") << ")\n";
  }
}

int finish(const RunReport& r, const std::filesystem::path& dir) {
  emit_report(r, dir);
  print(r);
  return r.passed() ? 0 : 2;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw std::invalid_argument("empty worker list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel reduced-order-model training and deployment"};
  app.require_subcommand(1);

  Common common;
  auto* run = app.add_subcommand("run", "run all five stages");
  add_common(run, common);

  int stage = 0;
  std::vector<CLI::App*> stage_cmds;
  for (int k = 1; k <= 5; ++k) {
    auto* s = app.add_subcommand("stage" + std::to_string(k), "run stage " + std::to_string(k) + " from persisted inputs");
    add_common(s, common);
    s->callback([&stage, k] { stage = k; });
    stage_cmds.push_back(s);
  }

  auto* verify = app.add_subcommand("verify", "recompute both verifications from persisted arrays");
  add_common(verify, common);

  auto* evaluate = app.add_subcommand("evaluate", "run the persisted HROM for one parameter point");
  std::string model_dir;
  double q_dot = 1.0, vel_scale = 1.0;
  std::string schedule_text;
  std::string csv_path;
  evaluate->add_option("--model", model_dir, "directory holding config.json, basis.bmx and rule.txt")->required();
  evaluate->add_option("--q-dot", q_dot, "source intensity");
  evaluate->add_option("--vel-scale", vel_scale, "convection speed multiplier");
  evaluate->add_option("--schedule", schedule_text, "phases steps:source:flow, comma separated");
  evaluate->add_option("--csv", csv_path, "mean temperature output (default MODEL/evaluation.csv)");

  auto* bench = app.add_subcommand("bench-svd", "time the SVD algorithms over OpenMP team sizes");
  add_common(bench, common);
  std::string worker_list = "1,2,4";
  int repeats = 3;
  double eps = 1e-6;
  bench->add_option("--worker-list", worker_list, "comma-separated team sizes");
  bench->add_option("--repeats", repeats, "best-of repeats")->check(CLI::PositiveNumber);
  bench->add_option("--eps", eps, "truncation tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      Pipeline p(resolve(common));
      return finish(p.run(), p.config().output_dir);
    }
    if (stage > 0) {
      Pipeline p(resolve(common));
      return finish(p.run_stage(stage), p.config().output_dir);
    }
    if (verify->parsed()) {
      Pipeline p(resolve(common));
      const RunReport r = p.verify();
      print(r);
      return r.passed() ? 0 : 2;
    }
    if (evaluate->parsed()) {
      Schedule sched;
      if (schedule_text.empty()) {
        sched = constant_schedule(load_config(std::filesystem::path(model_dir) / "config.json").problem.time_steps);
      } else {
        sched = parse_schedule(schedule_text);
      }
      const Evaluation ev = evaluate_hrom(model_dir, ParamPoint{q_dot, vel_scale}, sched);
      const std::filesystem::path out = csv_path.empty() ? std::filesystem::path(model_dir) / "evaluation.csv" : std::filesystem::path(csv_path);
      write_mean_temperature(out, ev.solution.mean_temperature);
      std::cout << "steps " << ev.solution.mean_temperature.size() << ", wall " << ev.wall_seconds << " s, "
                << "final mean temperature " << ev.solution.mean_temperature.back() << "\nwrote " << out.string()
                << '\n';
      return 0;
    }
    if (bench->parsed()) {
      const WorkflowConfig cfg = resolve(common);
      const auto snap = cfg.output_dir / "snapshots.bmx";
      BlockedMatrix s;
      if (std::filesystem::exists(snap)) {
        s = read_bmx(snap);
      } else {
        const FomProblem p = FomProblem::desk(cfg.problem);
        s = generate_snapshots(p, cfg.params, constant_schedule(cfg.problem.time_steps), cfg.block_shape, cfg.workers)
                .snapshots;
      }
      const auto rows = bench_svd(s, TruncationSpec::tolerance(eps), parse_int_list(worker_list), repeats);
      std::filesystem::create_directories(cfg.output_dir);
      write_bench_csv(cfg.output_dir / "bench_svd.csv", rows);
      for (const auto& r : rows) std::cout << r.algorithm << "  workers " << r.workers << "  " << r.seconds << " s  N=" << r.rank << '\n';
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
