#include "homog/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace homog {

void parallel_for(std::size_t n_tasks, int threads, const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::min<std::size_t>(n_tasks, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n_tasks; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (error) std::rethrow_exception(error);
}

void parallel_reduce(std::size_t n_tasks, std::size_t width, const ParallelOptions& options,
                     const std::function<void(std::size_t, std::span<double>)>& task, std::vector<double>& out) {
    out.assign(width, 0.0);
    if (options.deterministic || options.threads <= 1) {
        std::vector<std::vector<double>> partial(n_tasks, std::vector<double>(width, 0.0));
        parallel_for(n_tasks, options.threads, [&](std::size_t i) { task(i, partial[i]); });
        for (const auto& p : partial) {
            for (std::size_t k = 0; k < width; ++k) out[k] += p[k];
        }
        return;
    }
    std::mutex m;
    parallel_for(n_tasks, options.threads, [&](std::size_t i) {
        std::vector<double> p(width, 0.0);
        task(i, p);
        std::lock_guard lock(m);
        for (std::size_t k = 0; k < width; ++k) out[k] += p[k];
    });
}

}  // namespace homog
