#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace hlod {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must be
/// independent; results written to per-index slots are deterministic
/// regardless of the schedule.
inline void parallel_for(int n, int workers,
                         const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nthreads = std::min(workers, n);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Worker count: HLOD_WORKERS if set, else hardware concurrency, at least 1.
int default_workers();

}  // namespace hlod
