#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace nfmi {

// Runs fn(0..n_jobs-1) on up to n_workers threads. Jobs must be independent;
// each writes only its own result slot, so results are deterministic
// regardless of scheduling.
inline void parallel_for_jobs(int n_jobs, int n_workers,
                              const std::function<void(int)>& fn) {
  if (n_jobs <= 0) return;
  const int workers = std::max(1, std::min(n_workers, n_jobs));
  if (workers == 1) {
    for (int i = 0; i < n_jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int j = next.fetch_add(1, std::memory_order_relaxed);
        if (j >= n_jobs) break;
        fn(j);
      }
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace nfmi
