#pragma once

namespace hatlab {

/// How data-parallel loops run. `serial` is the reference path the parallel
/// kernels are tested against; both produce bit-identical results.
enum class Execution { serial, parallel };

/// Threads OpenMP will use for `Execution::parallel` (1 without OpenMP).
int max_threads();

}  // namespace hatlab
