#pragma once

#include <cstddef>
#include <functional>

namespace cqr {

/// Thread count to use for `requested` (0 means one per hardware thread).
std::size_t resolve_threads(std::size_t requested) noexcept;

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks must not
/// throw; callers record failures themselves.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace cqr
