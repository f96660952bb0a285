#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fracrd {

/// Worker count used by the pointwise and spectral loops. Affects speed only:
/// every parallel loop writes disjoint outputs and no reduction depends on the
/// schedule.
inline std::atomic<std::size_t>& thread_count() {
  static std::atomic<std::size_t> n{1};
  return n;
}

inline void set_thread_count(std::size_t n) { thread_count().store(std::max<std::size_t>(n, 1)); }

namespace detail {
inline bool& inside_worker() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/// Calls body(begin, end) on contiguous chunks of [0, n). The first exception
/// thrown by the lowest-indexed chunk is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min(thread_count().load(), std::max<std::size_t>(n, 1));
  // Nested loops run serially inside a worker.
  if (workers <= 1 || detail::inside_worker()) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        detail::inside_worker() = true;
        try {
          body(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fracrd
