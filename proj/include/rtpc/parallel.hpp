#pragma once

#include <cstddef>
#include <functional>

namespace rtpc {

/// Worker cap from RTPC_THREADS (unset or 0 = hardware concurrency).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n). Each index must write to its own output slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace rtpc
