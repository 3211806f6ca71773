#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace monoseq {

/// Runs fn(chunk_index) for every chunk in [0, chunks) on up to `threads`
/// workers. Callers make results independent of the thread count by giving
/// each chunk its own output slot and reducing the slots in index order.
template <typename Fn>
void parallel_chunks(std::size_t chunks, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, chunks));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = next++; c < chunks; c = next++) fn(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::size_t chunk_count(std::size_t items, std::size_t chunk_size) {
  return (items + chunk_size - 1) / chunk_size;
}

}  // namespace monoseq
