#pragma once

#include <atomic>

namespace romflow {

/// Cooperative cancellation flag, checked by long-running loops at iteration
/// boundaries.
class CancellationToken {
 public:
  void cancel() noexcept { flag_.store(true, std::memory_order_release); }
  bool cancelled() const noexcept { return flag_.load(std::memory_order_acquire); }

 private:
  std::atomic<bool> flag_{false};
};

}  // namespace romflow
