#pragma once

#include <cstddef>
#include <functional>

namespace qrng {

/// Worker count: QRNG_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t default_worker_count();

/// Runs body(begin, end) over [0, n) split into contiguous ranges whose
/// boundaries are multiples of `grain`. `workers == 0` means default_worker_count().
/// Callers must write only to state owned by their range; results are then
/// independent of the worker count.
void parallel_for(std::size_t n, std::size_t grain, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace qrng
