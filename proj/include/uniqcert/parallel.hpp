#ifndef UNIQCERT_PARALLEL_HPP
#define UNIQCERT_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace uniqcert {

/// Thread budget for embarrassingly parallel loops. UNIQCERT_THREADS caps
/// it; 0 or unset means hardware concurrency.
inline int thread_budget() {
  static const int budget = [] {
    long requested = 0;
    if (const char* env = std::getenv("UNIQCERT_THREADS")) {
      requested = std::strtol(env, nullptr, 10);
      if (requested < 0) requested = 0;
    }
    if (requested == 0) {
      unsigned hw = std::thread::hardware_concurrency();
      requested = hw == 0 ? 1 : static_cast<long>(hw);
    }
    return static_cast<int>(requested);
  }();
  return budget;
}

/// Runs fn(i) for i in [0, count). Each index must write only its own
/// output slot; results are then bit-identical for any thread count.
/// The first exception thrown by any fn(i) is rethrown on the caller.
template <class Fn>
void parallel_for(int count, Fn&& fn) {
  const int threads = std::min(thread_budget(), count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < count; i += threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace uniqcert

#endif  // UNIQCERT_PARALLEL_HPP
