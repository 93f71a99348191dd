#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hol {

// Runs task(0..count-1) on up to `jobs` threads. Tasks write to disjoint,
// pre-sized slots, so results are independent of scheduling. The first
// exception thrown by any task is rethrown after all workers stop.
template <typename Task>
void parallel_for(std::size_t count, int jobs, Task&& task) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < count; i = next++) task(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = count;
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hol
