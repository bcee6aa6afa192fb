// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_PARALLEL_HPP
#define FFUSION_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace ffusion {

/// Number of logical cores, never less than 1.
unsigned hardware_threads();

/// Calls body(begin, end) over contiguous chunks of [0, count). With
/// threads <= 1 everything runs on the calling thread. Chunk boundaries only
/// depend on count and threads, so callers writing into per-index slots get
/// identical output for any thread count.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace ffusion

#endif  // FFUSION_PARALLEL_HPP
