#pragma once

// Index-parallel loop over independent work items. jobs == 1 runs the
// plain serial loop (the reference path); jobs <= 0 uses the OpenMP
// default team size. The first exception thrown by any item is rethrown
// after the loop.

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace sellab {

template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (jobs == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace sellab
