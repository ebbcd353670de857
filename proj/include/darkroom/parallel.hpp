#pragma once

#include <cstdint>

#ifdef DARKROOM_HAVE_OPENMP
#include <omp.h>
#endif

namespace darkroom {

// Every kernel keeps a plain serial loop next to its OpenMP loop. Tests run
// both and require bit-identical output; the benchmark compares their speed.
enum class Exec { Serial, Parallel };

// Runs body(row) for row in [0, rows). Rows must be independent.
template <typename Body>
void for_rows(int rows, Exec exec, Body&& body) {
  if (exec == Exec::Serial) {
    for (int row = 0; row < rows; ++row) body(row);
    return;
  }
#ifdef DARKROOM_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 4)
  for (int row = 0; row < rows; ++row) body(row);
#else
  for (int row = 0; row < rows; ++row) body(row);
#endif
}

// Caps the worker count; 0 leaves the runtime default.
void set_thread_limit(int threads);
int thread_count();

// Reads DARKROOM_THREADS and applies it.
void apply_thread_env();

}  // namespace darkroom
