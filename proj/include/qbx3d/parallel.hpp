#pragma once

#include <cstddef>
#include <functional>

namespace qbx {

// Global worker count used by parallel_for. 0 means hardware concurrency.
void set_num_threads(int n);
int num_threads();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one
// task per chunk, so results written per-index are deterministic and
// independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Chunked variant: fn(begin, end) over disjoint ranges.
void parallel_for_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace qbx
