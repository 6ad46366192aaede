#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "levy_procure/statistics.hpp"

namespace levy_procure {

inline constexpr std::size_t kPathChunk = 1024;

// Runs fn(path_index, out) for every path and accumulates `dims` per-path
// quantities. Paths are grouped in fixed chunks whose moments are merged in
// chunk order, so the result is bit-identical for any thread count.
template <class Fn>
Moments run_paths(std::size_t n_paths, std::size_t dims, unsigned threads, Fn&& fn) {
  const std::size_t chunks = (n_paths + kPathChunk - 1) / kPathChunk;
  std::vector<Moments> partial(chunks, Moments(dims));

  auto work_chunk = [&](std::size_t c) {
    std::vector<double> out(dims);
    const std::size_t end = std::min(n_paths, (c + 1) * kPathChunk);
    for (std::size_t i = c * kPathChunk; i < end; ++i) {
      fn(static_cast<std::uint64_t>(i), std::span<double>(out));
      partial[c].add(out);
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) work_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t c = next++; c < chunks; c = next++) work_chunk(c);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  Moments total(dims);
  for (const auto& m : partial) total.merge(m);
  return total;
}

}  // namespace levy_procure
