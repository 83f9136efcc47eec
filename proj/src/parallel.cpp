// SPDX-License-Identifier: Apache-2.0
#include "belab/parallel.hpp"

#include <atomic>

namespace belab {

namespace {
std::atomic<unsigned> g_threads{1};
}  // namespace

void set_thread_count(unsigned threads) noexcept {
  g_threads.store(threads == 0 ? 1 : threads, std::memory_order_relaxed);
}

unsigned thread_count() noexcept { return g_threads.load(std::memory_order_relaxed); }

}  // namespace belab
