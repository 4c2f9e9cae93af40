#pragma once

#include <cstddef>
#include <functional>

namespace dradapt {

/// Upper bound on threads used by parallel_for. 0 restores the default
/// (std::thread::hardware_concurrency()).
void set_worker_count(std::size_t workers);
std::size_t worker_count();

/// Runs body(i) for i in [0, n), split into contiguous chunks across the
/// worker pool. Calls made from inside a worker run serially. Bodies must
/// write only to slots owned by their index so results do not depend on the
/// number of workers. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dradapt
