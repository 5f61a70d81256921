#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace galtrap {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};
  return n;
}
}  // namespace detail

/// Worker count for fork-join loops. 0 means "machine parallelism", which
/// GALERKIN_TRAP_THREADS overrides.
inline void set_thread_count(int n) { detail::thread_setting() = std::max(0, n); }

inline int thread_count() {
  int n = detail::thread_setting();
  if (n > 0) return n;
  if (const char* env = std::getenv("GALERKIN_TRAP_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is handled
/// by exactly one worker, so results written per index do not depend on the
/// thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 16) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_count()), (n + min_chunk - 1) / std::max<std::size_t>(1, min_chunk));
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
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace galtrap
