#pragma once

#include <cstddef>
#include <functional>

namespace cheegerlab {

/// Environment variable holding the worker count.
inline constexpr const char* kWorkersEnv = "CHEEGERLAB_WORKERS";

/// Worker count from CHEEGERLAB_WORKERS, defaulting to the hardware
/// concurrency. Always at least 1.
std::size_t worker_count();

/// Runs body(begin, end, worker) over contiguous chunks of [0, n). Chunks are
/// fixed by (n, workers) only, so merging per-chunk results in chunk order is
/// deterministic.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                     std::size_t workers = 0);

/// Runs body(i) for every i in [0, n) on the worker pool.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t workers = 0);

}  // namespace cheegerlab
