// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace belab {

/// Process-wide worker count used by the parallel loops; 1 means serial.
void set_thread_count(unsigned threads) noexcept;
unsigned thread_count() noexcept;

/*!
 * Runs body(i) for every i in [0, count). Items are claimed dynamically, so
 * body must write only to slot i of its output; callers fold the slots in
 * index order afterwards. The first exception thrown by any item is
 * rethrown on the calling thread.
 */
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace belab
