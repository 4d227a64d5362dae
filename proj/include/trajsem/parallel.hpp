#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace trajsem {

/**
 * Runs fn(0..n-1) on up to `parallelism` threads.
 *
 * The bounded-parallelism contract used across the library: callers
 * pre-size an output slot per index and each task writes only its own
 * slot, so results are identical for any thread count. The first
 * exception thrown by a task is rethrown on the calling thread.
 */
inline void parallel_for(std::size_t n, int parallelism,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (parallelism <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(body);
  for (auto& t : threads) t.join();

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace trajsem
