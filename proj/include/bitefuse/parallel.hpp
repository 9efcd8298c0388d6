#pragma once

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bitefuse {

// Runs fn(i) for i in [0,n). jobs: 0 = all cores, 1 = plain loop, N = N
// OpenMP threads. Iterations must be independent and write only to their
// own slot, so results never depend on scheduling. The first exception is
// captured and rethrown after the loop.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
#ifdef _OPENMP
  if (jobs != 1) {
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    return;
  }
#else
  (void)jobs;
#endif
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace bitefuse
