#include "romflow/executor.hpp"

#include <omp.h>

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace romflow {

TaskId TaskGraph::add(std::string name, std::vector<TaskId> deps, Fn fn) {
  const TaskId id = tasks_.size();
  for (TaskId d : deps) {
    if (d >= id) {
      throw std::invalid_argument("task '" + name + "' depends on unknown task " + std::to_string(d));
    }
  }
  tasks_.push_back(Node{std::move(name), std::move(deps), std::move(fn)});
  return id;
}

std::string TaskGraph::adjacency_list() const {
  std::ostringstream out;
  for (TaskId i = 0; i < tasks_.size(); ++i) {
    out << i << ' ' << tasks_[i].name << ':';
    for (TaskId d : tasks_[i].deps) out << ' ' << d;
    out << '\n';
  }
  return out.str();
}

bool TaskGraph::is_acyclic() const {
  const std::size_t n = tasks_.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<TaskId>> out(n);
  for (TaskId i = 0; i < n; ++i) {
    for (TaskId d : tasks_[i].deps) {
      if (d >= n) return false;
      out[d].push_back(i);
      ++indeg[i];
    }
  }
  std::deque<TaskId> q;
  for (TaskId i = 0; i < n; ++i) {
    if (indeg[i] == 0) q.push_back(i);
  }
  std::size_t seen = 0;
  while (!q.empty()) {
    const TaskId t = q.front();
    q.pop_front();
    ++seen;
    for (TaskId s : out[t]) {
      if (--indeg[s] == 0) q.push_back(s);
    }
  }
  return seen == n;
}

bool GraphRun::ok() const {
  return std::all_of(tasks.begin(), tasks.end(), [](const TaskRecord& t) { return t.status == TaskStatus::done; });
}

void GraphRun::rethrow_first_failure() const {
  for (const auto& t : tasks) {
    if (t.status == TaskStatus::failed && t.error) std::rethrow_exception(t.error);
  }
  for (const auto& t : tasks) {
    if (t.status != TaskStatus::done) throw std::runtime_error("task '" + t.name + "' did not run");
  }
}

class Executor {
 public:
  Executor(const TaskGraph& g, int workers, CancellationToken* cancel)
      : g_(g), workers_(std::max(1, workers)), cancel_(cancel) {}

  GraphRun run() {
    const std::size_t n = g_.tasks_.size();
    run_.tasks.resize(n);
    remaining_.assign(n, 0);
    dependents_.assign(n, {});
    for (TaskId i = 0; i < n; ++i) {
      run_.tasks[i].name = g_.tasks_[i].name;
      remaining_[i] = g_.tasks_[i].deps.size();
      for (TaskId d : g_.tasks_[i].deps) dependents_[d].push_back(i);
      if (remaining_[i] == 0) ready_.push_back(i);
    }
    unfinished_ = n;
    t0_ = std::chrono::steady_clock::now();

    const int hw = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    const int inner = std::max(1, hw / workers_);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers_));
    for (int w = 0; w < workers_; ++w) {
      pool.emplace_back([this, inner] {
        omp_set_num_threads(inner);
        work();
      });
    }
    for (auto& t : pool) t.join();
    run_.makespan_seconds = seconds_since_start();
    return std::move(run_);
  }

 private:
  double seconds_since_start() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

  // Caller holds the lock.
  void cancel_subtree(TaskId id) {
    std::vector<TaskId> stack{id};
    while (!stack.empty()) {
      const TaskId t = stack.back();
      stack.pop_back();
      for (TaskId s : dependents_[t]) {
        if (run_.tasks[s].status == TaskStatus::pending) {
          run_.tasks[s].status = TaskStatus::cancelled;
          --unfinished_;
          stack.push_back(s);
        }
      }
    }
  }

  void work() {
    std::unique_lock lock(mu_);
    for (;;) {
      cv_.wait(lock, [this] { return !ready_.empty() || unfinished_ == 0; });
      if (unfinished_ == 0) {
        cv_.notify_all();
        return;
      }
      const TaskId id = ready_.front();
      ready_.pop_front();
      if (cancel_ != nullptr && cancel_->cancelled()) {
        run_.tasks[id].status = TaskStatus::cancelled;
        --unfinished_;
        cancel_subtree(id);
        cv_.notify_all();
        continue;
      }

      std::vector<const std::any*> inputs;
      for (TaskId d : g_.tasks_[id].deps) inputs.push_back(&run_.tasks[d].result);
      run_.tasks[id].start_seconds = seconds_since_start();
      lock.unlock();

      std::any result;
      std::exception_ptr error;
      std::string message;
      try {
        result = g_.tasks_[id].fn(TaskContext(std::move(inputs), cancel_));
      } catch (const std::exception& e) {
        error = std::current_exception();
        message = e.what();
      } catch (...) {
        error = std::current_exception();
        message = "unknown error";
      }

      lock.lock();
      TaskRecord& rec = run_.tasks[id];
      rec.end_seconds = seconds_since_start();
      --unfinished_;
      if (error) {
        rec.status = TaskStatus::failed;
        rec.error = error;
        rec.error_message = message;
        cancel_subtree(id);
      } else {
        rec.status = TaskStatus::done;
        rec.result = std::move(result);
        for (TaskId s : dependents_[id]) {
          if (--remaining_[s] == 0 && run_.tasks[s].status == TaskStatus::pending) ready_.push_back(s);
        }
      }
      cv_.notify_all();
    }
  }

  const TaskGraph& g_;
  int workers_;
  CancellationToken* cancel_;
  GraphRun run_;
  std::vector<std::size_t> remaining_;
  std::vector<std::vector<TaskId>> dependents_;
  std::deque<TaskId> ready_;
  std::size_t unfinished_ = 0;
  std::chrono::steady_clock::time_point t0_;
  std::mutex mu_;
  std::condition_variable cv_;
};

GraphRun execute_graph(const TaskGraph& graph, int workers, CancellationToken* cancel) {
  if (workers < 1) throw std::invalid_argument("execute_graph: workers must be at least 1");
  if (!graph.is_acyclic()) throw std::invalid_argument("execute_graph: graph has a cycle");
  return Executor(graph, workers, cancel).run();
}

}  // namespace romflow
