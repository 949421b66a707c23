#pragma once

// Index-based worker pool. Each index's work must be self-contained (own
// derived RNG stream, own output slot) so results are independent of
// scheduling order.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace coxcontract {

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

inline void parallel_for_index(std::size_t count, unsigned workers,
                               const std::function<void(std::size_t)>& work) {
  if (count == 0) return;
  if (workers <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto runner = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<std::size_t>(workers, count);
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(runner);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace coxcontract
