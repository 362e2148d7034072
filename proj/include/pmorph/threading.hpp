#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace pmorph {

// Process-wide worker count for library loops. Set from the CLI (--threads or
// PADIC_MORPHOGEN_THREADS); defaults to 1.
inline int& thread_count() {
  static int count = 1;
  return count;
}

inline void set_thread_count(int n) { thread_count() = std::max(1, n); }

inline int thread_count_from_env() {
  if (const char* env = std::getenv("PADIC_MORPHOGEN_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Runs fn(i) for i in [0, n), split into one contiguous block per worker.
// Every index is computed by exactly one thread with a fixed interior order,
// so results are bit-identical for any thread count.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
  int workers = thread_count();
  if (workers <= 1 || n < 4 * workers) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = w * chunk;
    std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace pmorph
