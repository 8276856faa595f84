#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef RINO_HAVE_OPENMP
#include <omp.h>
#endif

namespace rino {

enum class ExecMode { Serial, OpenMp };

// Process-wide execution mode for the data-parallel kernels. The serial mode
// runs the exact same per-index bodies sequentially and is kept as the
// reference implementation for testing and benchmarking.
ExecMode exec_mode();
void set_exec_mode(ExecMode mode);

// Thread budget: min(RINO_THREADS, hardware) when the env var is set and
// positive, otherwise the OpenMP default. Always 1 without OpenMP.
int thread_budget();

// Parallel loop over [0, n). Bodies must write only to index-private slots;
// reductions are done by the caller in fixed index order so results do not
// depend on the schedule or the thread count.
template <class F>
void parallel_for(std::size_t n, F&& body) {
#ifdef RINO_HAVE_OPENMP
  if (exec_mode() == ExecMode::OpenMp && thread_budget() > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(thread_budget())
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      body(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

// parallel_for for bodies that may throw: exceptions are captured per index
// and the lowest-index one is rethrown after the loop, so the thrown error
// does not depend on thread scheduling.
template <class F>
void parallel_for_checked(std::size_t n, F&& body) {
  std::vector<std::exception_ptr> errors(n);
  parallel_for(n, [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

}  // namespace rino
