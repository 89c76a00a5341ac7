#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace homog {

/// Threading and reduction-order policy shared by all point loops.
struct ParallelOptions {
    int threads = 1;
    /// Fixed chunk-order reduction (bit-reproducible) when true; otherwise
    /// partial results are merged in completion order.
    bool deterministic = true;
};

/// Runs task(i) for i in [0, n_tasks) on up to `threads` workers.
void parallel_for(std::size_t n_tasks, int threads, const std::function<void(std::size_t)>& task);

/// Sums per-task partial vectors into `out` (resized to `width`). Tasks are
/// run with parallel_for; with `deterministic` the partials are added in
/// task order, otherwise each worker adds its partial under a lock as soon
/// as it finishes.
void parallel_reduce(std::size_t n_tasks, std::size_t width, const ParallelOptions& options,
                     const std::function<void(std::size_t, std::span<double>)>& task, std::vector<double>& out);

}  // namespace homog
