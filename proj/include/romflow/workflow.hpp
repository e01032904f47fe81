#pragma once

// Five-stage training pipeline:
//   1. parallel FOM solves             -> S        (snapshots.bmx)
//   2. truncated SVD of S              -> Phi      (basis.bmx + basis.bmx.json)
//   3. parallel ROM solves             -> S_rom, S_r (rom_snapshots.bmx, residuals.bmx)
//      Verification 1 = relative_error(S_rom, S)
//   4. residual basis + ECM            -> rule     (rule.txt, ecm_levels.csv)
//   5. parallel HROM solves            -> S_hrom   (hrom_snapshots.bmx)
//      Verification 2 = relative_error(S_hrom, S_rom)
// Every artifact is written to the output directory so each stage can be
// rerun on its own from the files of the previous one.

#include "romflow/blocks.hpp"
#include "romflow/ecm.hpp"
#include "romflow/executor.hpp"
#include "romflow/fom.hpp"
#include "romflow/galerkin.hpp"
#include "romflow/svd.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace romflow {

enum class EcmMode { monolithic, partitioned };

struct EcmConfig {
  EcmMode mode = EcmMode::partitioned;
  Index partitions = 4;       // initial contiguous partitions
  Index partition_size = 0;   // 0: ceil(N_el / partitions)
  int n_recursions = 3;
};

struct WorkflowConfig {
  ProblemSpec problem;
  std::vector<ParamPoint> params;
  BlockShape block_shape{256, 27};
  SvdAlgorithm stage2_algorithm = SvdAlgorithm::full_tsqr;
  SvdAlgorithm stage4_algorithm = SvdAlgorithm::randomized;
  RandomizedOptions randomized;
  LanczosParams lanczos;
  double eps_sol = 1e-6;
  double eps_res = 1e-8;
  EcmConfig ecm;
  double gate1 = 0.0;  // 0: 100 * eps_sol
  double gate2 = 0.0;  // 0: 100 * eps_res
  int workers = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  double gate1_threshold() const { return gate1 > 0.0 ? gate1 : 100.0 * eps_sol; }
  double gate2_threshold() const { return gate2 > 0.0 ? gate2 : 100.0 * eps_res; }
  SvdSettings stage2_svd() const;
  SvdSettings stage4_svd() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// 3 x 3 grid q_dot, vel_scale in {0.5, 1.0, 1.5} on the 32 x 32 desk mesh.
WorkflowConfig desk_config();
WorkflowConfig load_config(const std::filesystem::path& path);
WorkflowConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const WorkflowConfig& config);
/// ROMFLOW_WORKERS, if set, replaces config.workers.
void apply_environment(WorkflowConfig& config);

struct StageRecord {
  std::string stage;
  double wall_seconds = 0.0;
  std::string shape;  // rows x cols of the stage output
};

struct RunReport {
  std::vector<StageRecord> stages;
  std::optional<double> verification1;
  std::optional<double> verification2;
  double gate1 = 0.0;
  double gate2 = 0.0;
  std::vector<double> verification1_per_param;
  std::vector<double> verification2_per_param;
  Index n_modes = 0;
  Index n_elements = 0;
  Index rule_size = 0;
  double fom_seconds = 0.0;   // summed FOM task time
  double hrom_seconds = 0.0;  // summed HROM task time
  std::uint64_t rom_element_evaluations = 0;
  std::uint64_t hrom_element_evaluations = 0;
  std::string task_graph;  // adjacency list of the executed graph
  std::size_t fom_tasks = 0;
  std::size_t rom_tasks = 0;
  std::size_t hrom_tasks = 0;

  bool gate1_passed() const { return !verification1 || *verification1 <= gate1; }
  bool gate2_passed() const { return !verification2 || *verification2 <= gate2; }
  bool passed() const { return gate1_passed() && gate2_passed(); }
  /// N_el / |E|, 0 before Stage 4.
  double element_ratio() const;
};

/// A stage that failed; what() names the stage, the task and the cause.
class StageError : public std::runtime_error {
 public:
  StageError(int stage, const std::string& what) : std::runtime_error(what), stage_(stage) {}
  int stage() const noexcept { return stage_; }

 private:
  int stage_;
};

class Pipeline {
 public:
  explicit Pipeline(WorkflowConfig config);

  const WorkflowConfig& config() const noexcept { return config_; }
  const FomProblem& problem() const noexcept { return problem_; }

  /// All five stages as one task graph.
  RunReport run();
  /// One stage, reading its inputs from the output directory. k in [1, 5].
  RunReport run_stage(int k);
  /// Recomputes both verifications from the persisted arrays.
  RunReport verify() const;

 private:
  WorkflowConfig config_;
  FomProblem problem_;
};

/// Writes report.csv, verification.csv and speedup.csv into dir.
void emit_report(const RunReport& report, const std::filesystem::path& dir);

struct Evaluation {
  ReducedSolution solution;
  double wall_seconds = 0.0;
};

/// Loads the persisted config, basis and rule from model_dir and runs the
/// HROM (full projection) for mu under schedule.
Evaluation evaluate_hrom(const std::filesystem::path& model_dir, const ParamPoint& mu, const Schedule& schedule);
/// step, mean_temperature
void write_mean_temperature(const std::filesystem::path& path, const std::vector<double>& mean);
/// "steps:source:flow,steps:source:flow,..."; a bare integer is one full phase.
Schedule parse_schedule(const std::string& text);

struct SvdBenchRow {
  std::string algorithm;
  int workers = 1;
  double seconds = 0.0;
  Index rank = 0;
};

/// Times compute_basis for every algorithm and OpenMP team size; best of
/// `repeats` runs.
std::vector<SvdBenchRow> bench_svd(const BlockedMatrix& a, const TruncationSpec& truncation,
                                   const std::vector<int>& workers, int repeats);
void write_bench_csv(const std::filesystem::path& path, const std::vector<SvdBenchRow>& rows);

}  // namespace romflow
