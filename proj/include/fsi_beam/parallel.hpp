#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fsi_beam {

// Worker count used by parallel_for. Results never depend on it: every index
// owns its output slot and no reductions happen across workers.
inline std::atomic<unsigned>& thread_count() {
  static std::atomic<unsigned> count{1};
  return count;
}

inline void set_thread_count(unsigned n) { thread_count() = std::max(1u, n); }

template <class F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count().load(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(n, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fsi_beam
