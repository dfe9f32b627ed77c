#pragma once

#include <cstdint>
#include <functional>

namespace hose {

/// Thread budget: HOSE_THREADS when set (minimum 1), hardware concurrency
/// otherwise. HOSE_THREADS=1 forces serial execution.
int max_threads();

/// Runs body(i) for i in [0, n), possibly across threads. Callers must make
/// iterations independent and write results into per-index slots so the
/// aggregate is deterministic regardless of schedule. Exceptions from body
/// are rethrown (an arbitrary one when several iterations throw).
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

}  // namespace hose
