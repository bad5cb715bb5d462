#pragma once

#include <cstddef>
#include <functional>

namespace depbound {

/// requested > 0 wins; otherwise DEPBOUND_THREADS; otherwise 1.
std::size_t resolve_threads(std::size_t requested);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once and results must be written to per-index slots, so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace depbound
