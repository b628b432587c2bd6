#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tbr {

// Run fn(state, i) for i in [0, n); each worker thread owns one state
// object built by make_state(). Side effects must be commutative or land in
// per-index slots, so results do not depend on the work distribution.
template <typename MakeState, typename Fn>
void parallel_for_with_state(size_t n, unsigned threads, MakeState&& make_state,
                             Fn&& fn) {
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  threads = static_cast<unsigned>(std::min<size_t>(threads, n));
  if (threads <= 1) {
    auto state = make_state();
    for (size_t i = 0; i < n; ++i) fn(state, i);
    return;
  }
  std::atomic<size_t> cursor{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    try {
      auto state = make_state();
      for (;;) {
        size_t i = cursor.fetch_add(1);
        if (i >= n) return;
        fn(state, i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      cursor.store(n);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

template <typename Fn>
void parallel_for(size_t n, unsigned threads, Fn&& fn) {
  parallel_for_with_state(
      n, threads, [] { return 0; }, [&](int&, size_t i) { fn(i); });
}

}  // namespace tbr
