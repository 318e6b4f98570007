#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace oclab {

/// Ordered parallel map: fn(i) for i in [0,count), results indexed by i so
/// the output (and anything aggregated from it in order) is independent of
/// the worker count. fn must be pure. The lowest-index exception, if any,
/// is rethrown after all workers join.
template <class Fn>
auto parallel_map(std::size_t count, int jobs, Fn&& fn) {
  using R = decltype(fn(std::size_t(0)));
  std::vector<R> results(count);
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min<std::size_t>(std::size_t(jobs), count);
  pool.reserve(n);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

} // namespace oclab
