#include "qbx3d/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace qbx {

namespace {
std::atomic<int> g_threads{0};
}

void set_num_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int num_threads() {
  int n = g_threads.load();
  if (n == 0) {
    unsigned hw = std::thread::hardware_concurrency();
    n = hw == 0 ? 1 : static_cast<int>(hw);
  }
  return n;
}

void parallel_for_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t nt = static_cast<std::size_t>(num_threads());
  nt = std::min(nt, n);
  if (nt <= 1) {
    fn(0, n);
    return;
  }
  // Interleave small blocks across workers for load balance; each index is
  // still processed exactly once by exactly one worker.
  const std::size_t block = std::max<std::size_t>(1, n / (nt * 8));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        std::size_t b = next.fetch_add(block);
        if (b >= n) break;
        fn(b, std::min(n, b + block));
      }
    });
  }
  for (auto& th : pool) th.join();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  parallel_for_ranges(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace qbx
