#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace orgsift {

// Runs body(lo, hi) over fixed-size chunks of [0, total). The chunk grid
// depends only on `total` and `chunk`, and results must be written to
// caller-indexed slots, so outputs are identical for every worker count.
template <class Body>
void parallel_chunks(size_t total, unsigned workers, size_t chunk, Body&& body) {
  if (total == 0) return;
  const size_t nchunks = (total + chunk - 1) / chunk;
  const size_t nthreads = std::min<size_t>(std::max(1u, workers), nchunks);
  if (nthreads <= 1) {
    for (size_t c = 0; c < nchunks; ++c) {
      const size_t lo = c * chunk;
      body(lo, std::min(total, lo + chunk));
    }
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    while (true) {
      const size_t c = next.fetch_add(1);
      if (c >= nchunks) break;
      const size_t lo = c * chunk;
      try {
        body(lo, std::min(total, lo + chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(nchunks);
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (size_t t = 0; t < nthreads; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace orgsift
