#include "rino/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace rino {
namespace {

std::atomic<ExecMode> g_mode{ExecMode::OpenMp};

int read_thread_budget() {
#ifdef RINO_HAVE_OPENMP
  int hw = omp_get_max_threads();
  const char* env = std::getenv("RINO_THREADS");
  if (env != nullptr) {
    int want = std::atoi(env);
    if (want > 0 && want < hw) return want;
    if (want > 0) return want <= hw ? want : hw;
  }
  return hw;
#else
  return 1;
#endif
}

}  // namespace

ExecMode exec_mode() { return g_mode.load(std::memory_order_relaxed); }

void set_exec_mode(ExecMode mode) { g_mode.store(mode, std::memory_order_relaxed); }

int thread_budget() {
  static int budget = read_thread_budget();
  return budget;
}

}  // namespace rino
