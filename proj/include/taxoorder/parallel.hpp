#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace taxoorder {

// Thread cap: TAXOORDER_THREADS if set, else hardware concurrency.
inline unsigned max_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("TAXOORDER_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
  }
  return hw;
}

// Runs f(i) for i in [0, n). Each index writes only its own output slot,
// so results are identical regardless of the thread count.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned threads = max_threads();
  if (threads <= 1 || n < 1024) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&f, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace taxoorder
