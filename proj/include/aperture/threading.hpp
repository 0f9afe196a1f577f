#pragma once

#include <cstddef>
#include <functional>

namespace aperture {

// Runs fn(i) for i in [0, n) split into contiguous static chunks, one per
// worker. Each index is processed exactly once by exactly one thread, so any
// computation that writes only to slot i is bit-reproducible for every
// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads = 1);

}  // namespace aperture
