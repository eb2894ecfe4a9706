#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace ringml {

/// Default chunk length for deterministic parallel reductions. Chunk
/// boundaries are fixed by this constant, never by the thread count, so
/// per-chunk partial results merge in the same order on every run.
inline constexpr std::int64_t kReduceChunk = 16384;

inline int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Runs fn(chunk_index, begin, end) over [0, count) split into fixed-size
/// chunks. Each chunk is processed by exactly one thread; callers that need
/// deterministic results store per-chunk output and fold it in chunk order.
template <class Fn>
void for_each_chunk(std::int64_t count, int threads, Fn&& fn,
                    std::int64_t chunk = kReduceChunk) {
  if (count <= 0) return;
  const std::int64_t n_chunks = (count + chunk - 1) / chunk;
  if (threads <= 1 || n_chunks == 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c) {
      fn(c, c * chunk, std::min(count, (c + 1) * chunk));
    }
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c, c * chunk, std::min(count, (c + 1) * chunk));
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<std::int64_t>(threads, n_chunks);
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace ringml
