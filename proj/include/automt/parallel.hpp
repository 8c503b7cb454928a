#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace automt
{

// Runs fn(i) for i in [0, count) on at most `parallelism` threads and returns
// results in index order. If any task throws, the exception from the lowest
// failing index is rethrown after all workers finish.
template <typename Fn>
auto parallel_map(std::size_t count, std::size_t parallelism, Fn && fn)
  -> std::vector<std::invoke_result_t<Fn &, std::size_t>>
{
  using Result = std::invoke_result_t<Fn &, std::size_t>;
  std::vector<std::optional<Result>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  auto threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (auto & error : errors) {
    if (error) std::rethrow_exception(error);
  }
  std::vector<Result> results;
  results.reserve(count);
  for (auto & slot : slots) results.push_back(std::move(*slot));
  return results;
}

}  // namespace automt
