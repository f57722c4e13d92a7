#pragma once

// Deterministic work partitioning. Grids are cut into blocks of a fixed
// size that does not depend on the worker count, each block's result is
// written to its own slot, and reductions walk the slots in block order.
// This keeps every floating-point result bit-identical no matter how many
// threads execute the blocks.

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace corridor_tilt {

// Fixed block length for all grid-sized loops.
inline constexpr std::size_t kEvalBlock = 2048;

// Thread count resolution: explicit request > CORRIDOR_TILT_THREADS > all cores.
inline std::size_t resolve_thread_count(std::size_t requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CORRIDOR_TILT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

inline std::size_t block_count(std::size_t n, std::size_t block = kEvalBlock) {
  return n == 0 ? 0 : (n - 1) / block + 1;
}

// Runs fn(block_index, begin, end) once per block, on up to `threads`
// workers. fn must only write state owned by its block.
template <class Fn>
void for_each_block(std::size_t n, std::size_t threads, Fn&& fn,
                    std::size_t block = kEvalBlock) {
  const std::size_t nblocks = block_count(n, block);
  if (nblocks == 0) return;
  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * block;
    const std::size_t end = std::min(n, begin + block);
    fn(b, begin, end);
  };
  threads = std::min(threads == 0 ? std::size_t{1} : threads, nblocks);
  if (threads <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= nblocks || failed.load(std::memory_order_relaxed)) return;
      try {
        run_block(b);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace corridor_tilt
