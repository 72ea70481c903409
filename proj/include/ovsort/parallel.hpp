#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ovsort/errors.hpp"
#include "ovsort/pipeline.hpp"

namespace ovsort {

struct ParallelConfig {
    std::size_t threads = 4;
    /// Also distribute the bucket merges. Off by default: only the baseline
    /// sorts run concurrently.
    bool parallel_merge = false;
    SortConfig inner;
};

inline void validate(const ParallelConfig& cfg) {
    if (cfg.threads == 0) {
        throw ParameterError("thread count must be at least 1");
    }
    if (cfg.threads > cfg.inner.p) {
        throw ParameterError("thread count " + std::to_string(cfg.threads) + " exceeds p = " +
                             std::to_string(cfg.inner.p));
    }
}

/// Runs indexed tasks on a fixed number of workers pulling from a shared
/// counter. Returns once every task is done; the first exception thrown by a
/// task is rethrown in the caller after all workers have stopped.
class TaskPool {
public:
    explicit TaskPool(std::size_t workers) : workers_(workers == 0 ? 1 : workers) {}

    std::size_t workers() const noexcept { return workers_; }

    template <class Fn>
    void operator()(std::size_t count, Fn&& fn) const {
        if (workers_ == 1 || count <= 1) {
            for (std::size_t i = 0; i < count; ++i) {
                fn(i);
            }
            return;
        }

        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::exception_ptr error;
        std::mutex error_mutex;

        auto drain = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= count || failed.load(std::memory_order_relaxed)) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        };

        {
            std::vector<std::jthread> helpers;
            helpers.reserve(workers_ - 1);
            for (std::size_t w = 1; w < workers_; ++w) {
                helpers.emplace_back(drain);
            }
            drain();
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }

private:
    std::size_t workers_;
};

/// Like sort_into, with the baseline sorts (and optionally the merges) on the pool.
template <class T, class Compare = KeyLess>
SortReport mc_sort_into(std::span<T> work, std::span<T> out, const ParallelConfig& cfg, Compare comp = {}) {
    validate(cfg);
    const TaskPool pool(cfg.threads);
    if (cfg.parallel_merge) {
        return detail::run_pipeline(work, out, cfg.inner, comp, pool, pool);
    }
    return detail::run_pipeline(work, out, cfg.inner, comp, pool, detail::SerialExecutor{});
}

/// Multi-core variant: the p baseline sorts (and optionally the p bucket
/// merges) are spread over `cfg.threads` workers. Every task writes a
/// disjoint span fixed before fan-out, so the result is byte-identical to
/// the sequential pipeline for any thread count.
template <class T, class Compare = KeyLess>
SortResult<T> mc_sort(std::span<const T> input, const ParallelConfig& cfg, Compare comp = {}) {
    SortResult<T> result;
    std::vector<T> work(input.begin(), input.end());
    result.keys.resize(work.size());
    result.report = mc_sort_into(std::span<T>(work), std::span<T>(result.keys), cfg, comp);
    return result;
}

template <std::size_t L>
SortReport mc_sort_with_oracle_check(std::span<const Key<L>> input, const ParallelConfig& cfg) {
    auto result = mc_sort(input, cfg, KeyLess{});
    verify_sorted(input, std::span<const Key<L>>(result.keys), result.report);
    return result.report;
}

} // namespace ovsort
