#pragma once

#include "tgf/integrator.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace tgf {

// Runs fn(i) for i in [0, n) on `workers` threads; results are stored by index,
// so the output never depends on scheduling.
template <class Result>
std::vector<Result> parallel_map(std::size_t n, int workers, const std::function<Result(std::size_t)>& fn)
{
    std::vector<Result> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    int w = std::max(1, std::min<int>(workers, int(n)));
    if (w == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < w; ++k)
            pool.emplace_back(body);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
    return out;
}

inline std::vector<PathRecord> run_ensemble(const SimContext& ctx, std::size_t n_paths, int workers)
{
    return parallel_map<PathRecord>(n_paths, workers, [&](std::size_t i) { return simulate_path(ctx, i); });
}

} // namespace tgf
