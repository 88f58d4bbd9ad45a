#pragma once

#include <cstddef>
#include <functional>

namespace presda {

// Worker cap: min(SDA_THREADS, hardware_concurrency), at least 1.
int max_threads();

// Runs fn(chunk_begin, chunk_end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on n and chunk_size, never on the thread
// count, so any floating-point reduction done per chunk and merged in chunk
// order gives identical results for every SDA_THREADS setting.
void parallel_for(std::size_t n, std::size_t chunk_size,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace presda
