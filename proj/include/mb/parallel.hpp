#pragma once

#include <cstddef>
#include <functional>

namespace mb {

/// Upper bound on worker threads used by grid loops. Defaults to the
/// hardware concurrency; the CLI lowers it from MB_THREADS.
unsigned max_workers();
void set_max_workers(unsigned workers);

/// Reads MB_THREADS (if set and positive) and applies it.
void configure_workers_from_env();

/// Calls body(i) for every i in [0, count). Work is split into contiguous
/// chunks across workers when count * cost_hint is large enough; calls made
/// from inside a worker run serially. Results must be written to per-index
/// slots by the caller so that reductions stay independent of the worker
/// count.
void parallel_for(std::size_t count, std::size_t cost_hint,
                  const std::function<void(std::size_t)>& body);

} // namespace mb
