#pragma once

// Deterministic fan-out of per-path work.  Paths are split into contiguous
// blocks, one per worker; every path derives its randomness from its own
// index, and callers collect results into path-indexed storage, so output is
// byte-identical for any worker count or scheduling.

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ccrn {

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Calls fn(path_index) exactly once for every path in [0, n_paths).  A value
// of 0 for `workers` selects the machine parallelism.  If several workers
// throw, the exception from the lowest path block is rethrown.
inline void parallel_paths(std::uint64_t n_paths, unsigned workers,
                           const std::function<void(std::uint64_t)>& fn) {
  if (workers == 0) workers = default_workers();
  if (n_paths == 0) return;
  if (workers > n_paths) workers = static_cast<unsigned>(n_paths);

  if (workers == 1) {
    for (std::uint64_t i = 0; i < n_paths; ++i) fn(i);
    return;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const auto run_block = [&](unsigned w) {
    const std::uint64_t lo = n_paths * w / workers;
    const std::uint64_t hi = n_paths * (w + 1) / workers;
    try {
      for (std::uint64_t i = lo; i < hi; ++i) fn(i);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run_block, w);
  run_block(0);
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace ccrn
