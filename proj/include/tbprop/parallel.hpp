#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace tbprop {

/// Worker count: TBPROP_THREADS if set to a positive integer, else hardware concurrency.
inline std::size_t thread_budget() {
  if (const char* env = std::getenv("TBPROP_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

namespace detail {

inline std::atomic<int>& activity_counter() {
  static std::atomic<int> counter{0};
  return counter;
}

/// Marks a stretch of library work so the benchmark can refuse to share the process.
class ActivityScope {
 public:
  ActivityScope() { activity_counter().fetch_add(1); }
  ~ActivityScope() { activity_counter().fetch_sub(1); }
  ActivityScope(const ActivityScope&) = delete;
  ActivityScope& operator=(const ActivityScope&) = delete;
};

}  // namespace detail

/// Runs f(i) for i in [0, n) on up to thread_budget() threads with static chunking.
/// Each index must write only its own output slot; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  detail::ActivityScope scope;
  const std::size_t workers = std::min(thread_budget(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tbprop
