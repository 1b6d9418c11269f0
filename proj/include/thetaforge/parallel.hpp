#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

namespace thetaforge {

// Worker count: THETA_FORGE_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

// Runs body(chunk) for chunk in [0, n_chunks) on up to thread_count() threads.
// Chunks are independent; callers store per-chunk results by index so that
// the combined result never depends on the thread count.
void parallel_chunks(std::size_t n_chunks, const std::function<void(std::size_t)>& body);

// Pairwise (tree) summation in index order. Bit-reproducible for a fixed input.
double pairwise_sum(std::span<const double> xs);
std::complex<double> pairwise_sum(std::span<const std::complex<double>> xs);

}  // namespace thetaforge
