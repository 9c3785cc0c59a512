#pragma once

#include <cstddef>
#include <functional>

namespace poipred {

// Worker count: hardware concurrency, capped by POISSON_PREDICT_THREADS.
std::size_t max_threads();

// Runs fn(chunk_index, begin, end) over [0,n) split into fixed-size chunks.
// Chunk boundaries depend only on n and chunk_size, never on the worker
// count, so per-chunk results combined in chunk order are identical for any
// thread count.
void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace poipred
