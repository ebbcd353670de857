#include "darkroom/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace darkroom {

void set_thread_limit(int threads) {
#ifdef DARKROOM_HAVE_OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int thread_count() {
#ifdef DARKROOM_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void apply_thread_env() {
  const char* env = std::getenv("DARKROOM_THREADS");
  if (env == nullptr) return;
  int threads = 0;
  auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), threads);
  if (ec == std::errc() && threads > 0) set_thread_limit(threads);
}

}  // namespace darkroom
