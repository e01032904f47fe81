#include "romflow/workflow.hpp"

#include "romflow/bmx_io.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace romflow {

namespace {

namespace fs = std::filesystem;

const char* kSnapshots = "snapshots.bmx";
const char* kBasis = "basis.bmx";
const char* kRomSnapshots = "rom_snapshots.bmx";
const char* kResiduals = "residuals.bmx";
const char* kRule = "rule.txt";
const char* kHromSnapshots = "hrom_snapshots.bmx";
const char* kConfig = "config.json";

std::string shape_of(const BlockedMatrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> per_param_errors(const BlockedMatrix& a, const BlockedMatrix& b, Index steps) {
  std::vector<double> out;
  for (Index first = 0; first < b.cols(); first += steps) {
    const Dense da = a.columns(first, steps);
    const Dense db = b.columns(first, steps);
    out.push_back((da - db).norm() / db.norm());
  }
  return out;
}

// Everything one run produces; tasks write disjoint parts of it.
struct State {
  BlockedMatrix s;
  Basis basis;
  std::unique_ptr<ReducedModel> rom;
  BlockedMatrix s_rom;
  BlockedMatrix s_r;
  PartitionedEcmResult ecm;
  CubatureRule rule;
  std::unique_ptr<HromModel> hrom;
  BlockedMatrix s_hrom;

  std::mutex mu;
  std::uint64_t rom_evaluations = 0;
  std::uint64_t hrom_evaluations = 0;
};

struct StageTasks {
  int stage;
  std::vector<TaskId> ids;
  std::string shape;
};

class Builder {
 public:
  Builder(const WorkflowConfig& c, const FomProblem& p, State& st, RunReport& rep)
      : cfg_(c), problem_(p), st_(st), rep_(rep), steps_(c.problem.time_steps) {}

  TaskGraph graph;

  std::vector<TaskId> stage1() {
    const Index m = static_cast<Index>(cfg_.params.size());
    st_.s = BlockedMatrix(problem_.n_dofs(), m * steps_, cfg_.block_shape);
    std::vector<TaskId> ids;
    for (std::size_t i = 0; i < cfg_.params.size(); ++i) {
      ids.push_back(add(1, "fom_" + std::to_string(i), {}, [this, i] {
        const FomSolution sol = solve_fom(problem_, cfg_.params[i], schedule());
        st_.s.set_columns(static_cast<Index>(i) * steps_, sol.states);
      }));
    }
    rep_.fom_tasks = ids.size();
    fom_ids_ = ids;
    return {add(1, "persist_snapshots", ids, [this] { write_bmx(out(kSnapshots), st_.s); })};
  }

  std::vector<TaskId> stage2(std::vector<TaskId> deps) {
    return {add(2, "svd_basis", std::move(deps), [this] {
      st_.basis = compute_basis(st_.s, cfg_.stage2_svd());
      save_basis(out(kBasis), st_.basis);
    })};
  }

  // Allocates S_rom and S_r once N is known, before any ROM task writes.
  std::vector<TaskId> stage3(std::vector<TaskId> deps) {
    const TaskId alloc = add(3, "allocate_rom_arrays", std::move(deps), [this] {
      st_.rom = std::make_unique<ReducedModel>(problem_, st_.basis);
      const Index m = static_cast<Index>(cfg_.params.size());
      const Index n = st_.rom->n_modes();
      st_.s_rom = BlockedMatrix(problem_.n_dofs(), m * steps_, cfg_.block_shape);
      st_.s_r = BlockedMatrix(problem_.n_elements(), n * m * steps_,
                              BlockShape(cfg_.block_shape.rows_per_block, n * steps_));
    });
    std::vector<TaskId> ids;
    for (std::size_t i = 0; i < cfg_.params.size(); ++i) {
      ids.push_back(add(3, "rom_" + std::to_string(i), {alloc}, [this, i] {
        const ReducedSolution sol = solve_rom(*st_.rom, cfg_.params[i], schedule());
        const Index first = static_cast<Index>(i) * steps_;
        const Index n = st_.rom->n_modes();
        st_.s_rom.set_columns(first, sol.full_states);
        for (Index s = 0; s < steps_; ++s) {
          st_.s_r.set_columns((first + s) * n, sol.projected_residuals[static_cast<std::size_t>(s)]);
        }
        std::lock_guard lock(st_.mu);
        st_.rom_evaluations += sol.element_evaluations;
      }));
    }
    rep_.rom_tasks = ids.size();
    return {add(3, "persist_rom_arrays", ids, [this] {
      write_bmx(out(kRomSnapshots), st_.s_rom);
      write_bmx(out(kResiduals), st_.s_r);
    })};
  }

  TaskId verification1(std::vector<TaskId> deps) {
    return add(3, "verification1", std::move(deps), [this] {
      rep_.verification1 = relative_error(st_.s_rom, st_.s);
      rep_.verification1_per_param = per_param_errors(st_.s_rom, st_.s, steps_);
    });
  }

  std::vector<TaskId> stage4(std::vector<TaskId> deps) {
    return {add(4, "ecm_rule", std::move(deps), [this] {
      const Index n_el = st_.s_r.rows();
      if (cfg_.ecm.mode == EcmMode::monolithic) {
        st_.ecm = monolithic_ecm(st_.s_r, cfg_.stage4_svd(), cfg_.eps_res);
      } else {
        const Index size = cfg_.ecm.partition_size > 0
                               ? cfg_.ecm.partition_size
                               : (n_el + cfg_.ecm.partitions - 1) / cfg_.ecm.partitions;
        st_.ecm = partitioned_ecm(st_.s_r, PartitionPlan::by_size(n_el, size, cfg_.ecm.n_recursions),
                                  cfg_.stage4_svd(), cfg_.eps_res, cfg_.workers);
      }
      st_.rule = st_.ecm.rule;
      save_rule(out(kRule), st_.rule);
      write_levels();
    })};
  }

  std::vector<TaskId> stage5(std::vector<TaskId> deps) {
    const TaskId alloc = add(5, "allocate_hrom_arrays", std::move(deps), [this] {
      if (!st_.rom) st_.rom = std::make_unique<ReducedModel>(problem_, st_.basis);
      st_.hrom = std::make_unique<HromModel>(HromModel{st_.rom.get(), st_.rule});
      st_.hrom->validate();
      st_.s_hrom = BlockedMatrix(problem_.n_dofs(), static_cast<Index>(cfg_.params.size()) * steps_, cfg_.block_shape);
    });
    std::vector<TaskId> ids;
    for (std::size_t i = 0; i < cfg_.params.size(); ++i) {
      ids.push_back(add(5, "hrom_" + std::to_string(i), {alloc}, [this, i] {
        const ReducedSolution sol = solve_hrom(*st_.hrom, cfg_.params[i], schedule(), HromMode::full_projection);
        st_.s_hrom.set_columns(static_cast<Index>(i) * steps_, sol.full_states);
        std::lock_guard lock(st_.mu);
        st_.hrom_evaluations += sol.element_evaluations;
      }));
    }
    rep_.hrom_tasks = ids.size();
    hrom_ids_ = ids;
    return {add(5, "persist_hrom_snapshots", ids, [this] { write_bmx(out(kHromSnapshots), st_.s_hrom); })};
  }

  TaskId verification2(std::vector<TaskId> deps) {
    return add(5, "verification2", std::move(deps), [this] {
      rep_.verification2 = relative_error(st_.s_hrom, st_.s_rom);
      rep_.verification2_per_param = per_param_errors(st_.s_hrom, st_.s_rom, steps_);
    });
  }

  void execute() {
    const GraphRun run = execute_graph(graph, cfg_.workers);
    rep_.task_graph = graph.adjacency_list();
    for (TaskId t = 0; t < run.tasks.size(); ++t) {
      const TaskRecord& r = run.tasks[t];
      if (r.status == TaskStatus::failed) {
        throw StageError(stage_of_.at(t), "stage " + std::to_string(stage_of_.at(t)) + " failed in task '" + r.name +
                                              "': " + r.error_message);
      }
    }
    run.rethrow_first_failure();

    std::map<int, std::pair<double, double>> span;
    for (TaskId t = 0; t < run.tasks.size(); ++t) {
      const int k = stage_of_.at(t);
      auto [it, fresh] = span.try_emplace(k, run.tasks[t].start_seconds, run.tasks[t].end_seconds);
      if (!fresh) {
        it->second.first = std::min(it->second.first, run.tasks[t].start_seconds);
        it->second.second = std::max(it->second.second, run.tasks[t].end_seconds);
      }
    }
    for (const auto& [k, se] : span) {
      rep_.stages.push_back(StageRecord{"stage" + std::to_string(k), se.second - se.first, stage_shape(k)});
    }
    for (TaskId t : fom_ids_) rep_.fom_seconds += run.tasks[t].end_seconds - run.tasks[t].start_seconds;
    for (TaskId t : hrom_ids_) rep_.hrom_seconds += run.tasks[t].end_seconds - run.tasks[t].start_seconds;
  }

 private:
  template <class Fn>
  TaskId add(int stage, std::string name, std::vector<TaskId> deps, Fn fn) {
    const TaskId id = graph.add(std::move(name), std::move(deps), [fn](const TaskContext&) -> std::any {
      fn();
      return {};
    });
    stage_of_[id] = stage;
    return id;
  }

  Schedule schedule() const { return constant_schedule(steps_); }
  fs::path out(const char* name) const { return cfg_.output_dir / name; }

  std::string stage_shape(int k) const {
    switch (k) {
      case 1: return shape_of(st_.s);
      case 2: return shape_of(st_.basis.vectors);
      case 3: return shape_of(st_.s_r);
      case 4: return std::to_string(st_.rule.size()) + "x1";
      case 5: return shape_of(st_.s_hrom);
      default: return "";
    }
  }

  void write_levels() const {
    std::ofstream f(out("ecm_levels.csv"));
    if (!f) throw IoError("cannot write " + out("ecm_levels.csv").string());
    f.precision(17);
    f << "level,partitions,candidates_in,survivors,svd_cost,ecm_cost\n";
    for (const auto& l : st_.ecm.levels) {
      f << l.level << ',' << l.partitions.size() << ',' << l.candidates_in << ',' << l.survivors << ','
        << l.svd_cost << ',' << l.ecm_cost << '\n';
    }
    f << "total,,,," << st_.ecm.total_svd_cost << ',' << st_.ecm.total_ecm_cost << '\n';
  }

  const WorkflowConfig& cfg_;
  const FomProblem& problem_;
  State& st_;
  RunReport& rep_;
  Index steps_;
  std::map<TaskId, int> stage_of_;
  std::vector<TaskId> fom_ids_;
  std::vector<TaskId> hrom_ids_;
};

fs::path need(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("missing artifact " + p.string());
  return p;
}

void fill_summary(RunReport& rep, const WorkflowConfig& cfg, const FomProblem& p, const State& st) {
  rep.gate1 = cfg.gate1_threshold();
  rep.gate2 = cfg.gate2_threshold();
  rep.n_elements = p.n_elements();
  rep.n_modes = st.basis.size();
  rep.rule_size = st.rule.size();
  rep.rom_element_evaluations = st.rom_evaluations;
  rep.hrom_element_evaluations = st.hrom_evaluations;
}

}  // namespace

double RunReport::element_ratio() const {
  return rule_size > 0 ? static_cast<double>(n_elements) / static_cast<double>(rule_size) : 0.0;
}

Pipeline::Pipeline(WorkflowConfig config) : config_(std::move(config)), problem_(FomProblem::desk(config_.problem)) {
  config_.validate();
}

RunReport Pipeline::run() {
  fs::create_directories(config_.output_dir);
  {
    std::ofstream f(config_.output_dir / kConfig);
    f << config_to_json_text(config_);
  }
  State st;
  RunReport rep;
  Builder b(config_, problem_, st, rep);
  const auto s1 = b.stage1();
  const auto s2 = b.stage2(s1);
  const auto s3 = b.stage3(s2);
  b.verification1(s3);
  const auto s4 = b.stage4(s3);
  const auto s5 = b.stage5(s4);
  b.verification2(s5);
  b.execute();
  fill_summary(rep, config_, problem_, st);
  return rep;
}

RunReport Pipeline::run_stage(int k) {
  if (k < 1 || k > 5) throw std::invalid_argument("stage must be in [1, 5]");
  const fs::path dir = config_.output_dir;
  fs::create_directories(dir);
  if (k == 1) {
    std::ofstream f(dir / kConfig);
    f << config_to_json_text(config_);
  }
  State st;
  RunReport rep;
  Builder b(config_, problem_, st, rep);
  switch (k) {
    case 1:
      b.stage1();
      break;
    case 2:
      st.s = read_bmx(need(dir / kSnapshots));
      b.stage2({});
      break;
    case 3: {
      st.basis = load_basis(need(dir / kBasis));
      const auto s3 = b.stage3({});
      if (fs::exists(dir / kSnapshots)) {
        st.s = read_bmx(dir / kSnapshots);
        b.verification1(s3);
      }
      break;
    }
    case 4:
      st.s_r = read_bmx(need(dir / kResiduals));
      b.stage4({});
      break;
    case 5: {
      st.basis = load_basis(need(dir / kBasis));
      st.rule = load_rule(need(dir / kRule));
      const auto s5 = b.stage5({});
      if (fs::exists(dir / kRomSnapshots)) {
        st.s_rom = read_bmx(dir / kRomSnapshots);
        b.verification2(s5);
      }
      break;
    }
  }
  b.execute();
  fill_summary(rep, config_, problem_, st);
  if (k == 3 || k == 4) rep.n_modes = st.rom ? st.rom->n_modes() : rep.n_modes;
  return rep;
}

RunReport Pipeline::verify() const {
  const fs::path dir = config_.output_dir;
  const auto t0 = std::chrono::steady_clock::now();
  const BlockedMatrix s = read_bmx(need(dir / kSnapshots));
  const BlockedMatrix s_rom = read_bmx(need(dir / kRomSnapshots));
  const BlockedMatrix s_hrom = read_bmx(need(dir / kHromSnapshots));
  const Index steps = config_.problem.time_steps;
  RunReport rep;
  rep.verification1 = relative_error(s_rom, s);
  rep.verification1_per_param = per_param_errors(s_rom, s, steps);
  rep.verification2 = relative_error(s_hrom, s_rom);
  rep.verification2_per_param = per_param_errors(s_hrom, s_rom, steps);
  rep.gate1 = config_.gate1_threshold();
  rep.gate2 = config_.gate2_threshold();
  rep.n_elements = problem_.n_elements();
  if (fs::exists(dir / kRule)) rep.rule_size = load_rule(dir / kRule).size();
  rep.stages.push_back(StageRecord{"verify", seconds_since(t0), shape_of(s)});
  return rep;
}

}  // namespace romflow
