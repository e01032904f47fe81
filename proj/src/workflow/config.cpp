#include "romflow/workflow.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace romflow {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw std::invalid_argument(where + ": unknown key '" + k + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

EcmMode parse_ecm_mode(const std::string& s) {
  if (s == "monolithic") return EcmMode::monolithic;
  if (s == "partitioned") return EcmMode::partitioned;
  throw std::invalid_argument("ecm.mode must be 'monolithic' or 'partitioned', got '" + s + "'");
}

const char* ecm_mode_name(EcmMode m) { return m == EcmMode::monolithic ? "monolithic" : "partitioned"; }

}  // namespace

SvdSettings WorkflowConfig::stage2_svd() const {
  SvdSettings s;
  s.algorithm = stage2_algorithm;
  s.truncation = TruncationSpec::tolerance(eps_sol);
  s.randomized = randomized;
  s.randomized.seed = seed;
  s.lanczos = lanczos;
  s.lanczos.seed = seed;
  return s;
}

SvdSettings WorkflowConfig::stage4_svd() const {
  SvdSettings s = stage2_svd();
  s.algorithm = stage4_algorithm;
  s.truncation = TruncationSpec::tolerance(eps_res);
  return s;
}

void WorkflowConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  if (params.empty()) fail("params must not be empty");
  for (const auto& p : params) {
    if (!std::isfinite(p.q_dot) || !std::isfinite(p.vel_scale)) fail("params must be finite");
  }
  if (!(eps_sol > 0.0 && eps_sol < 1.0)) fail("eps_sol must lie in (0, 1)");
  if (!(eps_res > 0.0 && eps_res < 1.0)) fail("eps_res must lie in (0, 1)");
  if (workers < 1) fail("workers must be at least 1");
  if (problem.mesh_n < 1) fail("problem.mesh_n must be positive");
  if (problem.time_steps < 1) fail("problem.time_steps must be positive");
  if (block_shape.rows_per_block < 1 || block_shape.cols_per_block < 1) fail("block_shape must be positive");
  if (ecm.partitions < 1) fail("ecm.partitions must be at least 1");
  if (ecm.partition_size < 0) fail("ecm.partition_size must be nonnegative");
  if (ecm.n_recursions < 1) fail("ecm.n_recursions must be at least 1");
  if (gate1 < 0.0 || gate2 < 0.0) fail("gates must be nonnegative");
  lanczos.validate();
}

WorkflowConfig desk_config() {
  WorkflowConfig c;
  for (double q : {0.5, 1.0, 1.5}) {
    for (double v : {0.5, 1.0, 1.5}) c.params.push_back({q, v});
  }
  return c;
}

WorkflowConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  only_keys(j, "config", {"problem", "params", "param_grid", "block_shape", "svd", "eps_sol", "eps_res", "ecm",
                          "gates", "workers", "seed", "output_dir"});
  WorkflowConfig c;
  try {
    if (j.contains("problem")) {
      const json& p = j["problem"];
      only_keys(p, "problem", {"mesh_n", "diffusivity", "reaction_cubic", "time_steps", "dt", "theta"});
      read(p, "mesh_n", c.problem.mesh_n);
      read(p, "diffusivity", c.problem.diffusivity);
      read(p, "reaction_cubic", c.problem.reaction_cubic);
      read(p, "time_steps", c.problem.time_steps);
      read(p, "dt", c.problem.dt);
      read(p, "theta", c.problem.theta);
    }
    if (j.contains("params") && j.contains("param_grid")) {
      throw std::invalid_argument("config: give either params or param_grid, not both");
    }
    if (j.contains("params")) {
      for (const json& p : j["params"]) {
        only_keys(p, "params[]", {"q_dot", "vel_scale"});
        ParamPoint mu;
        read(p, "q_dot", mu.q_dot);
        read(p, "vel_scale", mu.vel_scale);
        c.params.push_back(mu);
      }
    } else if (j.contains("param_grid")) {
      const json& g = j["param_grid"];
      only_keys(g, "param_grid", {"q_dot", "vel_scale"});
      for (double q : g.at("q_dot").get<std::vector<double>>()) {
        for (double v : g.at("vel_scale").get<std::vector<double>>()) c.params.push_back({q, v});
      }
    } else {
      c.params = desk_config().params;
    }
    if (j.contains("block_shape")) {
      const json& b = j["block_shape"];
      only_keys(b, "block_shape", {"rows", "cols"});
      c.block_shape = BlockShape(b.at("rows").get<Index>(), b.at("cols").get<Index>());
    }
    if (j.contains("svd")) {
      const json& s = j["svd"];
      only_keys(s, "svd", {"stage2", "stage4", "randomized", "lanczos"});
      if (s.contains("stage2")) c.stage2_algorithm = parse_svd_algorithm(s["stage2"].get<std::string>());
      if (s.contains("stage4")) c.stage4_algorithm = parse_svd_algorithm(s["stage4"].get<std::string>());
      if (s.contains("randomized")) {
        const json& r = s["randomized"];
        only_keys(r, "svd.randomized", {"oversampling", "power_iters", "growth_step"});
        read(r, "oversampling", c.randomized.oversampling);
        read(r, "power_iters", c.randomized.power_iters);
        read(r, "growth_step", c.randomized.growth_step);
      }
      if (s.contains("lanczos")) {
        const json& l = s["lanczos"];
        only_keys(l, "svd.lanczos", {"k", "rank", "nsv", "block_cols", "convergence_tol", "max_outer_iterations"});
        read(l, "k", c.lanczos.k);
        read(l, "rank", c.lanczos.rank);
        read(l, "nsv", c.lanczos.nsv);
        read(l, "block_cols", c.lanczos.block_cols);
        read(l, "convergence_tol", c.lanczos.convergence_tol);
        read(l, "max_outer_iterations", c.lanczos.max_outer_iterations);
      }
    }
    read(j, "eps_sol", c.eps_sol);
    read(j, "eps_res", c.eps_res);
    if (j.contains("ecm")) {
      const json& e = j["ecm"];
      only_keys(e, "ecm", {"mode", "partitions", "partition_size", "n_recursions"});
      if (e.contains("mode")) c.ecm.mode = parse_ecm_mode(e["mode"].get<std::string>());
      read(e, "partitions", c.ecm.partitions);
      read(e, "partition_size", c.ecm.partition_size);
      read(e, "n_recursions", c.ecm.n_recursions);
    }
    if (j.contains("gates")) {
      const json& g = j["gates"];
      only_keys(g, "gates", {"verification1", "verification2"});
      read(g, "verification1", c.gate1);
      read(g, "verification2", c.gate2);
    }
    read(j, "workers", c.workers);
    read(j, "seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

WorkflowConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json_text(text.str());
}

std::string config_to_json_text(const WorkflowConfig& c) {
  json j;
  j["problem"] = {{"mesh_n", c.problem.mesh_n},           {"diffusivity", c.problem.diffusivity},
                  {"reaction_cubic", c.problem.reaction_cubic}, {"time_steps", c.problem.time_steps},
                  {"dt", c.problem.dt},                   {"theta", c.problem.theta}};
  j["params"] = json::array();
  for (const auto& p : c.params) j["params"].push_back({{"q_dot", p.q_dot}, {"vel_scale", p.vel_scale}});
  j["block_shape"] = {{"rows", c.block_shape.rows_per_block}, {"cols", c.block_shape.cols_per_block}};
  j["svd"] = {{"stage2", to_string(c.stage2_algorithm)},
              {"stage4", to_string(c.stage4_algorithm)},
              {"randomized",
               {{"oversampling", c.randomized.oversampling},
                {"power_iters", c.randomized.power_iters},
                {"growth_step", c.randomized.growth_step}}},
              {"lanczos",
               {{"k", c.lanczos.k},
                {"rank", c.lanczos.rank},
                {"nsv", c.lanczos.nsv},
                {"block_cols", c.lanczos.block_cols},
                {"convergence_tol", c.lanczos.convergence_tol},
                {"max_outer_iterations", c.lanczos.max_outer_iterations}}}};
  j["eps_sol"] = c.eps_sol;
  j["eps_res"] = c.eps_res;
  j["ecm"] = {{"mode", ecm_mode_name(c.ecm.mode)},
              {"partitions", c.ecm.partitions},
              {"partition_size", c.ecm.partition_size},
              {"n_recursions", c.ecm.n_recursions}};
  j["gates"] = {{"verification1", c.gate1_threshold()}, {"verification2", c.gate2_threshold()}};
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  return j.dump(2) + "\n";
}

void apply_environment(WorkflowConfig& config) {
  if (const char* w = std::getenv("ROMFLOW_WORKERS")) {
    try {
      config.workers = std::stoi(w);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("ROMFLOW_WORKERS is not an integer: ") + w);
    }
    if (config.workers < 1) throw std::invalid_argument("ROMFLOW_WORKERS must be at least 1");
  }
}

}  // namespace romflow
