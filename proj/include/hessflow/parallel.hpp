#pragma once

#include <cstddef>
#include <exception>
#include <limits>

namespace hessflow {

/// Worker count for per-node loops: OpenMP's default capped by the
/// HESSFLOW_THREADS environment variable; 1 without OpenMP.
int worker_count();

/// Runs body(i) for i in [0, count). Each index is written by exactly one
/// worker, so results do not depend on the worker count. If bodies throw,
/// the exception from the lowest index is rethrown after the loop.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
#ifdef HESSFLOW_HAVE_OPENMP
  const long long total = static_cast<long long>(count);
  std::exception_ptr error;
  long long error_at = std::numeric_limits<long long>::max();
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (total > 4096)
  for (long long i = 0; i < total; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(hessflow_parallel_for)
      if (i < error_at) {
        error_at = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
#else
  for (std::size_t i = 0; i < count; ++i) body(i);
#endif
}

}  // namespace hessflow
