#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace embspace {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(block_index, begin, end) over fixed-size blocks of [0, count).
// Block boundaries depend only on count and block_size, never on the thread
// count, so callers that write per-block results and reduce them in block
// order get identical output for any number of threads.
template <class Fn>
void parallel_blocks(std::size_t count, std::size_t block_size, int threads,
                     Fn&& fn) {
  if (count == 0) return;
  if (block_size == 0) block_size = 1;
  const std::size_t n_blocks = (count + block_size - 1) / block_size;
  const int n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                            n_blocks);
  if (n_threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::size_t lo = b * block_size;
      fn(b, lo, std::min(lo + block_size, count));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks || failed.load(std::memory_order_relaxed)) return;
      const std::size_t lo = b * block_size;
      try {
        fn(b, lo, std::min(lo + block_size, count));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads) - 1);
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Simple parallel loop where each index writes only its own results.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  parallel_blocks(count, 256, threads,
                  [&](std::size_t, std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i) fn(i);
                  });
}

}  // namespace embspace
