#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "greenwalk/kernels.hpp"

namespace greenwalk {

/// Worker cap for block-parallel loops (default 1).
void set_thread_count(int n);
int thread_count() noexcept;

/// Calls fn(b) for b in [0, n_blocks). Blocks are independent; callers store
/// per-block results by index so the reduction order never depends on workers.
void parallel_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& fn);

/// Stream for block b of a run seeded with `master`.
Rng substream(std::uint64_t master, std::uint64_t block);

/// Paths per independent stream.
inline constexpr std::size_t kPathsPerBlock = 1024;

}  // namespace greenwalk
