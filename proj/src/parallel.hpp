#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mdpm::detail {

inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the worker count; callers write to disjoint slots
/// so results do not depend on scheduling.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
  workers = resolve_workers(workers);
  if (workers <= 1 || n < 2 * static_cast<std::size_t>(workers)) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin == end) break;
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mdpm::detail
