// Copyright 2026 The ppseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PPSEG_PARALLEL_HPP_
#define PPSEG_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace ppseg {

// Maps items [0, count) with `map(i) -> T` on up to `threads` workers and folds
// the results with `merge(T&, const T&)`. Each worker folds into its own
// partial starting from `zero`; partials are folded in worker order.
// The result is thread-count independent only when `merge` is associative
// and commutative. If any item throws, workers stop picking up new items and
// the exception with the lowest item index seen is rethrown.
template <typename T, typename MapFn, typename MergeFn>
T ParallelMapReduce(std::size_t count, unsigned threads, const T& zero, MapFn&& map,
                    MergeFn&& merge) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(
                                                         std::max<std::size_t>(count, 1))));
  std::vector<T> partials(threads, zero);
  std::vector<std::pair<std::size_t, std::exception_ptr>> failures(threads,
                                                                   {count, nullptr});
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&](unsigned w) {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count || failed.load(std::memory_order_relaxed)) return;
      try {
        merge(partials[w], map(i));
      } catch (...) {
        if (i < failures[w].first) failures[w] = {i, std::current_exception()};
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  auto first = std::min_element(failures.begin(), failures.end(),
                                [](const auto& a, const auto& b) { return a.first < b.first; });
  if (first->second) std::rethrow_exception(first->second);

  T result = zero;
  for (const T& partial : partials) merge(result, partial);
  return result;
}

}  // namespace ppseg

#endif  // PPSEG_PARALLEL_HPP_
