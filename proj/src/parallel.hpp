#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace carnot::detail {

// Runs fn(chunk_index, begin, end) over [0, n) split into contiguous chunks.
// Chunk boundaries depend only on (n, threads), so any chunk-indexed
// reduction merged in chunk order is independent of scheduling.
template <class Fn>
void parallel_chunks(long n, int threads, Fn&& fn) {
  if (n <= 0) return;
  threads = std::max(1, threads);
  const long max_useful = static_cast<long>(std::min<long>(threads, n));
  if (max_useful == 1) {
    fn(0, 0L, n);
    return;
  }
  const long chunk = (n + max_useful - 1) / max_useful;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(max_useful));
  for (long c = 0; c < max_useful; ++c) {
    const long begin = c * chunk;
    const long end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace carnot::detail
