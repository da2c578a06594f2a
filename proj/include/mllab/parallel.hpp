#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mllab {

/// Runs body(i) for i in [0, count) on `threads` workers with contiguous
/// static blocks. Bodies must only write to per-index slots.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  const unsigned cap = static_cast<unsigned>(std::max<std::size_t>(std::min<std::size_t>(count, 1U << 16), 1));
  threads = std::clamp(threads, 1U, cap);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline unsigned default_thread_count() {
  return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace mllab
