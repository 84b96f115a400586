#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace impact {

/// Worker count used when a caller passes jobs <= 0.
int default_jobs();

/// Runs body(i) for every i in [0, n) on up to `jobs` threads. Each index is
/// visited exactly once; callers write results into pre-sized slots so the
/// outcome never depends on scheduling. If several indices throw, the
/// exception from the lowest index is rethrown.
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
  if (jobs <= 0) jobs = default_jobs();
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::mutex mu;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;

  auto run = [&](std::size_t w) {
    // Strided assignment keeps per-worker load even for sorted inputs.
    for (std::size_t i = w; i < n; i += workers) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(run, w);
  run(0);
  threads.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace impact
