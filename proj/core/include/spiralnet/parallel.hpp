#pragma once

#include <cstddef>
#include <functional>

namespace spiralnet {

/// Process-wide worker count used by the numeric kernels. Defaults to 1,
/// which is the bit-reproducible mode. Kernels that reduce across rows
/// split work into exactly `thread_count()` chunks and sum the partials in
/// chunk order, so results are deterministic for a fixed worker count.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Calls fn(begin, end, chunk) on `chunks` contiguous slices of [0, n).
/// Chunk boundaries depend only on n and chunks.
void parallel_chunks(std::size_t n, std::size_t chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// parallel_chunks with chunks = thread_count().
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace spiralnet
