#pragma once

// Sample-partitioned sequential sort. Five phases:
//   1. split the input into p contiguous sequences and base-sort each;
//   2. draw a sample (regular per sequence, or uniform over all keys);
//   3. take every s-th sample as a splitter;
//   4. locate the splitters inside every sorted sequence;
//   5. multiway-merge piece j of every sequence into bucket j, buckets concatenated.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ovsort/base_sort.hpp"
#include "ovsort/errors.hpp"
#include "ovsort/keys.hpp"
#include "ovsort/multiway_merge.hpp"
#include "ovsort/partition.hpp"
#include "ovsort/rng.hpp"

namespace ovsort {

/// Regular oversampling: r*p - 1 evenly spaced keys (plus the maximum) per sequence.
struct Deterministic {
    std::size_t r = 1;
};

/// Random oversampling with p*s - 1 sample keys. s defaults to ceil(lg^2 n);
/// setting `a` uses s = ceil(lg^(1+a) n) instead.
struct Randomized {
    std::optional<std::size_t> s;
    std::optional<double> a;
};

using SamplingMode = std::variant<Deterministic, Randomized>;

struct SortConfig {
    std::size_t p = 64;
    SamplingMode mode = Randomized{};
    BaseSortKind base = BaseSortKind::qs;
    SplitStrategy split = SplitStrategy::binary_search;
    std::uint64_t seed = 0;
    /// Require equal keys to keep input order; needs a stable base sort.
    bool stable = false;

    bool deterministic() const noexcept { return std::holds_alternative<Deterministic>(mode); }
};

inline std::size_t oversampling_for_exponent(std::size_t n, double a) {
    if (n < 2) {
        return 1;
    }
    double s = std::pow(std::log2(static_cast<double>(n)), 1.0 + a);
    // Snap values within rounding noise of an integer (n a power of two) before ceil.
    if (std::abs(s - std::round(s)) < 1e-9 * s) {
        s = std::round(s);
    }
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(s)));
}

/// ceil(lg^2 n)
inline std::size_t default_oversampling(std::size_t n) { return oversampling_for_exponent(n, 1.0); }

inline std::size_t resolve_oversampling(const Randomized& mode, std::size_t n) {
    if (mode.s) return *mode.s;
    if (mode.a) return oversampling_for_exponent(n, *mode.a);
    return default_oversampling(n);
}

namespace detail {

inline bool sample_fits(const SortConfig& cfg, std::size_t n) {
    if (cfg.p == 1) {
        return true;
    }
    const auto p = static_cast<unsigned __int128>(cfg.p);
    if (const auto* det = std::get_if<Deterministic>(&cfg.mode)) {
        return det->r * p * p <= n;
    }
    const auto s = resolve_oversampling(std::get<Randomized>(cfg.mode), n);
    return 2 * p * s < n;
}

} // namespace detail

/// Throws ParameterError unless `cfg` can sort n keys. p = 1 skips sampling and
/// is valid for any n; n = 0 only needs the n-independent checks.
inline void validate(const SortConfig& cfg, std::size_t n) {
    if (cfg.p == 0) {
        throw ParameterError("p must be at least 1");
    }
    if (cfg.stable && !is_stable(cfg.base)) {
        throw ParameterError("stable sort requested but base sort '" + std::string(to_string(cfg.base)) +
                             "' is not stable");
    }
    if (const auto* det = std::get_if<Deterministic>(&cfg.mode)) {
        if (det->r == 0) {
            throw ParameterError("r must be at least 1");
        }
    } else {
        const auto& ran = std::get<Randomized>(cfg.mode);
        if (ran.s && ran.a) {
            throw ParameterError("set either s or a, not both");
        }
        if (ran.s && *ran.s == 0) {
            throw ParameterError("s must be at least 1");
        }
        if (ran.a && !(*ran.a >= 0.0)) {
            throw ParameterError("a must be non-negative");
        }
    }
    if (n == 0 || detail::sample_fits(cfg, n)) {
        return;
    }
    if (const auto* det = std::get_if<Deterministic>(&cfg.mode)) {
        throw ParameterError("regular sample r*p^2 = " + std::to_string(det->r * cfg.p * cfg.p) + " exceeds n = " +
                             std::to_string(n));
    }
    const auto s = resolve_oversampling(std::get<Randomized>(cfg.mode), n);
    throw ParameterError("random sample needs p*s < n/2 (p = " + std::to_string(cfg.p) + ", s = " +
                         std::to_string(s) + ", n = " + std::to_string(n) + ")");
}

/// `cfg` with p lowered to the largest value that satisfies the sample-size
/// constraints for n (p = 1 if none does).
inline SortConfig fit_to(SortConfig cfg, std::size_t n) {
    while (cfg.p > 1 && !detail::sample_fits(cfg, n)) {
        --cfg.p;
    }
    return cfg;
}

struct PhaseTimes {
    double baseline = 0;
    double sample = 0;
    double splitter = 0;
    double split = 0;
    double merge = 0;

    double total() const noexcept { return baseline + sample + splitter + split + merge; }

    bool operator==(const PhaseTimes&) const = default;
};

struct SortReport {
    PhaseTimes seconds;
    std::size_t p = 1;
    /// s: samples per splitter.
    std::size_t oversampling = 0;
    std::vector<std::size_t> bucket_sizes;
    /// max bucket / (n/p)
    double expansion = 0;
    /// Deterministic runs with r^2 p^2 <= n carry the guaranteed limit.
    std::optional<std::size_t> balance_limit;
    bool balanced = true;
};

/// Phases 2-4 for baseline-sorted input.
template <class T>
struct PartitionResult {
    std::vector<TaggedSample<T>> sample;
    SplitterSet<T> splitters;
    PartitionPlan plan;
    std::size_t oversampling = 0;
};

template <class T>
struct SortResult {
    std::vector<T> keys;
    SortReport report;
};

namespace detail {

struct SerialExecutor {
    template <class Fn>
    void operator()(std::size_t count, Fn&& fn) const {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
    }
};

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double seconds = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return seconds;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

template <class T, class Compare>
PartitionResult<T> plan_partition_shifted(std::span<const T> sorted, const BaselineLayout& layout,
                                          const SortConfig& cfg, Compare comp, std::ptrdiff_t rank_shift,
                                          PhaseTimes* seconds) {
    const std::size_t n = sorted.size();
    const std::size_t p = layout.sequences();
    Stopwatch clock;
    PartitionResult<T> result{{}, {}, PartitionPlan(p), 0};

    if (const auto* det = std::get_if<Deterministic>(&cfg.mode)) {
        const RegularSampleParams params{p, det->r};
        result.oversampling = params.s();
        std::vector<std::vector<TaggedSample<T>>> per_sequence(p);
        for (std::size_t k = 0; k < p; ++k) {
            per_sequence[k] = regular_sample(layout.sequence(sorted, k), k, params, n);
        }
        result.sample = merge_samples(std::span<const std::vector<TaggedSample<T>>>(per_sequence), comp);
    } else {
        result.oversampling = resolve_oversampling(std::get<Randomized>(cfg.mode), n);
        SplitMix64 rng(cfg.seed);
        result.sample =
            random_sample(sorted, layout, RandomSampleParams{p, result.oversampling}, rng, cfg.base, comp);
    }
    if (seconds) seconds->sample = clock.lap();

    result.splitters = detail::select_splitters_shifted(std::span<const TaggedSample<T>>(result.sample), p,
                                                        result.oversampling, rank_shift);
    if (seconds) seconds->splitter = clock.lap();

    for (std::size_t k = 0; k < p; ++k) {
        result.plan.set_row(k, split_around(layout.sequence(sorted, k), k, result.splitters, comp, cfg.split));
    }
    if (seconds) seconds->split = clock.lap();
    return result;
}

/// Runs all five phases. `work` holds the input and is left baseline-sorted;
/// `out` receives the result. Phase 1 tasks go through `sort_tasks`, phase 5
/// bucket merges through `merge_tasks`; both must run every index exactly once.
template <class T, class Compare, class SortExec, class MergeExec>
SortReport run_pipeline(std::span<T> work, std::span<T> out, const SortConfig& cfg, Compare comp,
                        SortExec&& sort_tasks, MergeExec&& merge_tasks) {
    const std::size_t n = work.size();
    validate(cfg, n);
    if (out.size() != n) {
        throw CapacityError("pipeline output holds " + std::to_string(out.size()) + " keys, input " +
                            std::to_string(n));
    }

    SortReport report;
    report.p = cfg.p;
    if (n == 0) {
        return report;
    }

    const std::size_t p = cfg.p;
    const BaselineLayout layout(n, p);
    Stopwatch clock;

    sort_tasks(p, [&](std::size_t k) { base_sort(cfg.base, layout.sequence(work, k), comp); });
    report.seconds.baseline = clock.lap();

    if (p == 1) {
        std::copy(work.begin(), work.end(), out.begin());
        report.seconds.merge = clock.lap();
        report.bucket_sizes = {n};
        report.expansion = 1.0;
        return report;
    }

    const std::span<const T> sorted(work);
    const auto partition = plan_partition_shifted(sorted, layout, cfg, comp, 0, &report.seconds);
    const PartitionPlan& plan = partition.plan;
    report.oversampling = partition.oversampling;
    clock.lap();

    std::vector<std::size_t> bucket_offset(p + 1, 0);
    for (std::size_t j = 0; j < p; ++j) {
        bucket_offset[j + 1] = bucket_offset[j] + plan.bucket_size(j);
    }
    merge_tasks(p, [&](std::size_t j) {
        std::vector<MergeRun<T>> runs;
        runs.reserve(p);
        for (std::size_t k = 0; k < p; ++k) {
            const auto seq = layout.sequence(sorted, k);
            runs.push_back({k, seq.subspan(plan.at(k, j), plan.piece(k, j))});
        }
        multiway_merge(std::span<const MergeRun<T>>(runs),
                       out.subspan(bucket_offset[j], bucket_offset[j + 1] - bucket_offset[j]), comp);
    });
    report.seconds.merge = clock.lap();

    std::optional<BalanceBound> bound;
    if (const auto* det = std::get_if<Deterministic>(&cfg.mode)) {
        const BalanceBound candidate{n, p, det->r};
        if (candidate.applies()) {
            bound = candidate;
        }
    }
    auto balance = check_balance(plan, bound);
    report.bucket_sizes = std::move(balance.sizes);
    report.expansion = balance.expansion;
    report.balance_limit = balance.limit;
    report.balanced = balance.within_bound;
    return report;
}

template <class T, class Compare, class SortExec, class MergeExec>
SortResult<T> sort_copy(std::span<const T> input, const SortConfig& cfg, Compare comp, SortExec&& sort_tasks,
                        MergeExec&& merge_tasks) {
    std::vector<T> work(input.begin(), input.end());
    SortResult<T> result;
    result.keys.resize(work.size());
    result.report = run_pipeline(std::span<T>(work), std::span<T>(result.keys), cfg, comp, sort_tasks, merge_tasks);
    return result;
}

} // namespace detail

/// Sample, splitters and bucket bounds for `sorted`, which must already be
/// baseline-sorted under `layout` (p = layout.sequences() >= 2).
template <class T, class Compare = KeyLess>
PartitionResult<T> plan_partition(std::span<const T> sorted, const BaselineLayout& layout, const SortConfig& cfg,
                                  Compare comp = {}) {
    if (layout.sequences() < 2) {
        throw ParameterError("plan_partition needs at least two sequences");
    }
    return detail::plan_partition_shifted(sorted, layout, cfg, comp, 0, nullptr);
}

/// Sorts `work` into `out` (same size). `work` is used as scratch and is left
/// holding the baseline-sorted sequences.
template <class T, class Compare = KeyLess>
SortReport sort_into(std::span<T> work, std::span<T> out, const SortConfig& cfg, Compare comp = {}) {
    return detail::run_pipeline(work, out, cfg, comp, detail::SerialExecutor{}, detail::SerialExecutor{});
}

/// Sorts a copy of `input` with the configured sampling mode.
template <class T, class Compare = KeyLess>
SortResult<T> sort(std::span<const T> input, const SortConfig& cfg, Compare comp = {}) {
    return detail::sort_copy(input, cfg, comp, detail::SerialExecutor{}, detail::SerialExecutor{});
}

/// Regular-oversampling sort. `cfg.mode` must be Deterministic.
template <class T, class Compare = KeyLess>
SortResult<T> sq_det(std::span<const T> input, const SortConfig& cfg, Compare comp = {}) {
    if (!cfg.deterministic()) {
        throw ParameterError("sq_det needs a deterministic sampling mode");
    }
    return sort(input, cfg, comp);
}

/// Random-oversampling sort. `cfg.mode` must be Randomized.
template <class T, class Compare = KeyLess>
SortResult<T> sq_ran(std::span<const T> input, const SortConfig& cfg, Compare comp = {}) {
    if (cfg.deterministic()) {
        throw ParameterError("sq_ran needs a randomized sampling mode");
    }
    return sort(input, cfg, comp);
}

/// Throws VerificationError unless `output` is a nondecreasing permutation of
/// `input` and, where the regular-sampling bound applies, every bucket is within it.
template <std::size_t L>
void verify_sorted(std::span<const Key<L>> input, std::span<const Key<L>> output, const SortReport& report) {
    if (input.size() != output.size()) {
        throw VerificationError("output has " + std::to_string(output.size()) + " keys, input " +
                                    std::to_string(input.size()),
                                std::min(input.size(), output.size()));
    }
    for (std::size_t i = 1; i < output.size(); ++i) {
        if (output[i] < output[i - 1]) {
            throw VerificationError("output not sorted", i);
        }
    }
    if (fingerprint(input) != fingerprint(output)) {
        std::vector<Key<L>> expected(input.begin(), input.end());
        std::sort(expected.begin(), expected.end(), KeyLess{});
        std::size_t i = 0;
        while (i < output.size() && expected[i] == output[i]) {
            ++i;
        }
        throw VerificationError("output is not a permutation of the input", i);
    }
    if (report.balance_limit && !report.balanced) {
        std::size_t offset = 0;
        for (auto size : report.bucket_sizes) {
            if (size > *report.balance_limit) {
                throw VerificationError("bucket of " + std::to_string(size) + " keys exceeds balance limit " +
                                            std::to_string(*report.balance_limit),
                                        offset);
            }
            offset += size;
        }
    }
}

/// Sorts, then checks the result against the input (order, multiset, balance bound).
template <std::size_t L>
SortReport sort_with_oracle_check(std::span<const Key<L>> input, const SortConfig& cfg) {
    auto result = sort(input, cfg, KeyLess{});
    verify_sorted(input, std::span<const Key<L>>(result.keys), result.report);
    return result.report;
}

} // namespace ovsort
