#pragma once

// Dependency-driven task executor with a fixed worker pool.
//
// Tasks are added in any order that respects their dependencies (a task may
// only depend on tasks added before it), so every graph is acyclic by
// construction. A task becomes ready when all of its inputs have completed;
// ready tasks are started first-in first-out. A failing task marks its
// transitive dependents cancelled; unrelated tasks still run.

#include "romflow/cancellation.hpp"

#include <any>
#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace romflow {

using TaskId = std::size_t;

class TaskContext {
 public:
  TaskContext(std::vector<const std::any*> inputs, CancellationToken* cancel)
      : inputs_(std::move(inputs)), cancel_(cancel) {}

  std::size_t input_count() const noexcept { return inputs_.size(); }
  const std::any& input(std::size_t i) const { return *inputs_.at(i); }
  template <class T>
  const T& input_as(std::size_t i) const {
    return std::any_cast<const T&>(input(i));
  }
  bool cancelled() const noexcept { return cancel_ != nullptr && cancel_->cancelled(); }
  CancellationToken* token() const noexcept { return cancel_; }

 private:
  std::vector<const std::any*> inputs_;
  CancellationToken* cancel_;
};

class TaskGraph {
 public:
  using Fn = std::function<std::any(const TaskContext&)>;

  /// Throws std::invalid_argument if a dependency does not name an earlier task.
  TaskId add(std::string name, std::vector<TaskId> deps, Fn fn);

  std::size_t size() const noexcept { return tasks_.size(); }
  const std::string& name(TaskId id) const { return tasks_.at(id).name; }
  const std::vector<TaskId>& deps(TaskId id) const { return tasks_.at(id).deps; }

  /// "id name: dep dep ..." lines, one per task.
  std::string adjacency_list() const;
  /// Kahn's algorithm over the recorded edges.
  bool is_acyclic() const;

 private:
  friend class Executor;
  struct Node {
    std::string name;
    std::vector<TaskId> deps;
    Fn fn;
  };
  std::vector<Node> tasks_;
};

enum class TaskStatus { pending, done, failed, cancelled };

struct TaskRecord {
  std::string name;
  TaskStatus status = TaskStatus::pending;
  double start_seconds = 0.0;  // relative to the start of execute_graph
  double end_seconds = 0.0;
  std::any result;
  std::exception_ptr error;
  std::string error_message;
};

struct GraphRun {
  std::vector<TaskRecord> tasks;
  double makespan_seconds = 0.0;

  bool ok() const;
  /// Rethrows the failure of the lowest-numbered failed task, if any.
  void rethrow_first_failure() const;
  template <class T>
  const T& result(TaskId id) const {
    return std::any_cast<const T&>(tasks.at(id).result);
  }
};

/// Runs the graph on `workers` threads. OpenMP kernels inside tasks are given
/// max(1, hardware threads / workers) threads each. The token, if given, is
/// passed to every task and stops launching new tasks once cancelled.
GraphRun execute_graph(const TaskGraph& graph, int workers, CancellationToken* cancel = nullptr);

}  // namespace romflow
