#pragma once

#include <cstddef>
#include <functional>

namespace akns {

/// Worker cap: AKNS_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads (static chunks).
/// The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace akns
