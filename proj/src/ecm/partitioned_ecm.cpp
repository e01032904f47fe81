#include "romflow/ecm.hpp"

#include "romflow/executor.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace romflow {

PartitionPlan PartitionPlan::by_size(Index n_elements, Index partition_size, int n_recursions) {
  if (n_elements < 1 || partition_size < 1) throw std::invalid_argument("partition plan needs positive sizes");
  PartitionPlan p;
  p.partition_size = partition_size;
  p.n_recursions = n_recursions;
  for (Index b = 0; b < n_elements; b += partition_size) {
    p.partitions.push_back({b, std::min(n_elements, b + partition_size)});
  }
  p.validate(n_elements);
  return p;
}

PartitionPlan PartitionPlan::by_count(Index n_elements, Index count, int n_recursions) {
  if (n_elements < 1 || count < 1 || count > n_elements) {
    throw std::invalid_argument("partition plan: count must lie in [1, n_elements]");
  }
  PartitionPlan p;
  p.n_recursions = n_recursions;
  for (Index i = 0; i < count; ++i) {
    p.partitions.push_back({i * n_elements / count, (i + 1) * n_elements / count});
    p.partition_size = std::max(p.partition_size, p.partitions.back().size());
  }
  p.validate(n_elements);
  return p;
}

void PartitionPlan::validate(Index n_elements) const {
  if (n_recursions < 1) throw std::invalid_argument("partition plan: n_recursions must be at least 1");
  if (partition_size < 1) throw std::invalid_argument("partition plan: partition_size must be at least 1");
  if (partitions.empty()) throw std::invalid_argument("partition plan has no partitions");
  Index next = 0;
  for (const auto& r : partitions) {
    if (r.begin != next || r.end <= r.begin) {
      throw std::invalid_argument("partition plan: partitions must be contiguous, ordered and non-empty");
    }
    if (r.size() > partition_size) throw std::invalid_argument("partition plan: partition exceeds partition_size");
    next = r.end;
  }
  if (next != n_elements) throw std::invalid_argument("partition plan does not cover every element");
}

std::string PartitionedEcmResult::level_pattern() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0) out << " -> ";
    out << levels[i].partitions.size();
  }
  return out.str();
}

namespace {

struct PartitionOutcome {
  PartitionRecord record;
  std::vector<Index> elements;  // positions within the candidate list
  std::vector<double> weights;
  CubatureRule rule;
};

// Weighted residual basis of the rows `idx` of S, de-weighted, then ECM with
// the carried weights as reference.
PartitionOutcome reduce_partition(const BlockedMatrix& s, const std::vector<Index>& idx, const Vector& carried,
                                  const SvdSettings& svd, double eps_res, const EcmOptions& opt) {
  const BlockedMatrix rows = select_rows(s, idx);
  const BlockedMatrix weighted = scale_rows(rows, std::span<const double>(carried.data(), carried.size()));
  SvdSettings settings = svd;
  settings.truncation = TruncationSpec::tolerance(eps_res);
  const Basis basis = compute_basis(weighted, settings);
  Dense g = basis.vectors.to_dense();
  for (Index i = 0; i < g.rows(); ++i) g.row(i) /= carried(i);

  EcmStats stats;
  PartitionOutcome out;
  out.rule = ecm(g, &carried, eps_res, opt, &stats);
  out.elements = out.rule.elements;
  out.weights = out.rule.weights;

  auto& r = out.record;
  r.rows = rows.rows();
  r.cols = rows.cols();
  r.basis_rank = basis.size();
  r.selected = out.rule.size();
  r.ecm_iterations = stats.iterations;
  r.svd_cost = static_cast<double>(r.rows) * static_cast<double>(r.cols) * static_cast<double>(r.basis_rank);
  r.ecm_cost = static_cast<double>(stats.iterations) * static_cast<double>(r.basis_rank) * static_cast<double>(r.rows);
  return out;
}

void add_level(PartitionedEcmResult& res, LevelRecord level) {
  for (const auto& p : level.partitions) {
    level.svd_cost += p.svd_cost;
    level.ecm_cost += p.ecm_cost;
  }
  res.total_svd_cost += level.svd_cost;
  res.total_ecm_cost += level.ecm_cost;
  res.levels.push_back(std::move(level));
}

}  // namespace

PartitionedEcmResult monolithic_ecm(const BlockedMatrix& s_r, const SvdSettings& svd, double eps_res,
                                    const EcmOptions& opt) {
  std::vector<Index> all(static_cast<std::size_t>(s_r.rows()));
  for (Index i = 0; i < s_r.rows(); ++i) all[static_cast<std::size_t>(i)] = i;
  PartitionOutcome o = reduce_partition(s_r, all, Vector::Ones(s_r.rows()), svd, eps_res, opt);
  PartitionedEcmResult res;
  LevelRecord level;
  level.candidates_in = s_r.rows();
  level.survivors = o.rule.size();
  level.partitions.push_back(o.record);
  add_level(res, std::move(level));
  res.rule = std::move(o.rule);
  return res;
}

PartitionedEcmResult partitioned_ecm(const BlockedMatrix& s_r, const PartitionPlan& plan, const SvdSettings& svd,
                                     double eps_res, int workers, const EcmOptions& opt) {
  const Index n_el = s_r.rows();
  plan.validate(n_el);
  if (n_el <= plan.partition_size) return monolithic_ecm(s_r, svd, eps_res, opt);

  std::vector<Index> cand(static_cast<std::size_t>(n_el));
  for (Index i = 0; i < n_el; ++i) cand[static_cast<std::size_t>(i)] = i;
  Vector weights = Vector::Ones(n_el);
  std::vector<ElementRange> parts = plan.partitions;
  PartitionedEcmResult res;

  for (int level = 0; level < plan.n_recursions; ++level) {
    TaskGraph graph;
    for (const ElementRange& range : parts) {
      graph.add("ecm level " + std::to_string(level) + " [" + std::to_string(range.begin) + "," +
                    std::to_string(range.end) + ")",
                {}, [&, range](const TaskContext&) -> std::any {
                  const std::vector<Index> idx(cand.begin() + range.begin, cand.begin() + range.end);
                  return reduce_partition(s_r, idx, weights.segment(range.begin, range.size()), svd, eps_res, opt);
                });
    }
    const GraphRun run = execute_graph(graph, workers);
    run.rethrow_first_failure();

    LevelRecord rec;
    rec.level = level;
    rec.candidates_in = static_cast<Index>(cand.size());
    std::vector<Index> next;
    std::vector<double> next_w;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      const auto& o = run.result<PartitionOutcome>(p);
      const LocalToGlobal g = local_to_global(o.elements, o.weights, parts[p]);
      for (std::size_t k = 0; k < g.indices.size(); ++k) {
        next.push_back(cand[static_cast<std::size_t>(g.indices[k])]);
        next_w.push_back(g.weights[k]);
      }
      rec.partitions.push_back(o.record);
    }
    rec.survivors = static_cast<Index>(next.size());
    add_level(res, std::move(rec));

    const bool shrank = next.size() < cand.size();
    cand = std::move(next);
    weights = Eigen::Map<const Vector>(next_w.data(), static_cast<Index>(next_w.size()));
    const Index n_cand = static_cast<Index>(cand.size());
    if (!shrank || n_cand <= plan.partition_size || level + 1 == plan.n_recursions) break;
    const Index count = (n_cand + plan.partition_size - 1) / plan.partition_size;
    parts = PartitionPlan::by_count(n_cand, count, 1).partitions;
  }

  PartitionOutcome o = reduce_partition(s_r, cand, weights, svd, eps_res, opt);
  LevelRecord last;
  last.level = static_cast<int>(res.levels.size());
  last.candidates_in = static_cast<Index>(cand.size());
  last.survivors = o.rule.size();
  last.partitions.push_back(o.record);
  add_level(res, std::move(last));

  res.rule.tolerance = eps_res;
  for (std::size_t k = 0; k < o.rule.elements.size(); ++k) {
    res.rule.elements.push_back(cand[static_cast<std::size_t>(o.rule.elements[k])]);
    res.rule.weights.push_back(o.rule.weights[k]);
  }
  res.rule.achieved_error = integration_error(s_r, res.rule);
  return res;
}

}  // namespace romflow
