#pragma once

#include <cstddef>
#include <functional>

namespace tuckert {

/// Splits [0, n) into `threads` contiguous ranges and runs `body(begin, end,
/// worker)` on each, worker 0 on the calling thread. The partition depends
/// only on (n, threads), so per-worker partial results reduced in worker order
/// are reproducible for a fixed thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t, int)>& body);

/// Number of workers parallel_for will actually use for `n` items.
int effective_workers(std::size_t n, int threads);

}  // namespace tuckert
