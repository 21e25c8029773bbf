#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hjbd {

/// Worker count from HJBD_THREADS, else the hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// handled exactly once; results written per index are layout independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Pairwise (cascade) summation in index order.
double pairwise_sum(const double* values, std::size_t n);
inline double pairwise_sum(const std::vector<double>& values) { return pairwise_sum(values.data(), values.size()); }

}  // namespace hjbd
