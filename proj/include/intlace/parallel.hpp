#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace intlace {

// Runs fn(i) for i in [0, n). Work is handed out in fixed-size chunks and
// every fn(i) must write only to slot i of preallocated output, so results
// are identical for any worker count.
inline void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
  if (workers <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const size_t chunk = 256;
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (;;) {
      size_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      size_t end = std::min(begin + chunk, n);
      for (size_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers - 1; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

inline int default_workers() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : int(hc);
}

}  // namespace intlace
