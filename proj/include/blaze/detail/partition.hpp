#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>

namespace blaze::detail {

// Elements per round-robin chunk when a worker spreads its block over threads.
inline constexpr std::size_t kThreadChunk = 1024;

// Worker `rank`'s contiguous block of [0, n): ceil(n / size)-sized blocks,
// the last one short.
inline std::pair<std::size_t, std::size_t> block_range(std::size_t n, int rank, int size) {
  const std::size_t block = (n + static_cast<std::size_t>(size) - 1) / static_cast<std::size_t>(size);
  const std::size_t lo = std::min(n, block * static_cast<std::size_t>(rank));
  const std::size_t hi = std::min(n, lo + block);
  return {lo, hi};
}

// Calls f(i) for the indices of [0, n) that thread `tid` of `threads` owns:
// chunks tid, tid + threads, tid + 2 * threads, ...
template <class F>
void for_thread_chunks(std::size_t n, int tid, int threads, F&& f) {
  const std::size_t stride = kThreadChunk * static_cast<std::size_t>(threads);
  for (std::size_t c = kThreadChunk * static_cast<std::size_t>(tid); c < n; c += stride) {
    const std::size_t end = std::min(c + kThreadChunk, n);
    for (std::size_t i = c; i < end; ++i) f(i);
  }
}

}  // namespace blaze::detail
