#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovsort/base_sort.hpp"
#include "ovsort/errors.hpp"
#include "ovsort/multiway_merge.hpp"
#include "ovsort/rng.hpp"

namespace ovsort {

/// Splits n keys into p contiguous sequences. The first n mod p sequences hold
/// ceil(n/p) keys, the rest floor(n/p), so (sequence, index) follows input order.
class BaselineLayout {
public:
    BaselineLayout(std::size_t n, std::size_t p) : n_(n), p_(p) {
        if (p == 0) {
            throw ParameterError("baseline layout: p must be at least 1");
        }
        base_ = n / p;
        extra_ = n % p;
    }

    std::size_t keys() const noexcept { return n_; }
    std::size_t sequences() const noexcept { return p_; }
    std::size_t size(std::size_t k) const noexcept { return base_ + (k < extra_ ? 1 : 0); }
    std::size_t offset(std::size_t k) const noexcept { return k * base_ + std::min(k, extra_); }
    /// ceil(n/p), the padded sequence length.
    std::size_t max_size() const noexcept { return base_ + (extra_ ? 1 : 0); }

    /// Sequence holding global position g.
    std::size_t sequence_of(std::size_t g) const noexcept {
        const std::size_t long_span = extra_ * (base_ + 1);
        if (g < long_span) {
            return g / (base_ + 1);
        }
        return extra_ + (g - long_span) / base_;
    }

    template <class T>
    std::span<T> sequence(std::span<T> all, std::size_t k) const {
        return all.subspan(offset(k), size(k));
    }

private:
    std::size_t n_;
    std::size_t p_;
    std::size_t base_ = 0;
    std::size_t extra_ = 0;
};

/// A sample key tagged with where it lives: sequence `seq`, position `idx` in the sorted sequence.
template <class T>
struct TaggedSample {
    T key;
    std::size_t seq = 0;
    std::size_t idx = 0;
};

/// Lexicographic order on (key, seq, idx). Resolves duplicate keys by position,
/// so every tagged key has a distinct rank.
template <class Compare>
struct TaggedLess {
    Compare comp;

    template <class T>
    bool operator()(const TaggedSample<T>& a, const TaggedSample<T>& b) const {
        if (comp(a.key, b.key)) return true;
        if (comp(b.key, a.key)) return false;
        if (a.seq != b.seq) return a.seq < b.seq;
        return a.idx < b.idx;
    }
};

template <class Compare>
TaggedLess<Compare> tagged_less(Compare comp) {
    return TaggedLess<Compare>{comp};
}

struct RegularSampleParams {
    std::size_t p = 2;
    std::size_t r = 1;

    std::size_t s() const noexcept { return r * p; }
};

struct RandomSampleParams {
    std::size_t p = 2;
    std::size_t s = 1;

    std::size_t sample_size() const noexcept { return p * s - 1; }
};

/// Regular sample of one sorted sequence: keys at 1-based positions j*x for
/// j = 1..s-1 with x = ceil(ceil(n/p)/s), then the sequence maximum. Positions
/// past the end read the maximum, which stands in for padding every sequence
/// to ceil(n/p) keys.
template <class T>
std::vector<TaggedSample<T>> regular_sample(std::span<const T> sorted_seq, std::size_t seq,
                                            const RegularSampleParams& params, std::size_t n) {
    if (sorted_seq.empty()) {
        throw ParameterError("regular_sample: sequence " + std::to_string(seq) + " is empty");
    }
    if (params.p == 0 || params.r == 0) {
        throw ParameterError("regular_sample: p and r must be positive");
    }
    const std::size_t s = params.s();
    const std::size_t padded = (n + params.p - 1) / params.p;
    const std::size_t segment = (padded + s - 1) / s;
    const std::size_t last = sorted_seq.size() - 1;

    std::vector<TaggedSample<T>> out;
    out.reserve(s);
    for (std::size_t j = 1; j < s; ++j) {
        const std::size_t idx = std::min(j * segment - 1, last);
        out.push_back({sorted_seq[idx], seq, idx});
    }
    out.push_back({sorted_seq[last], seq, last});
    return out;
}

/// Merges per-sequence regular samples into one list sorted by (key, seq, idx).
template <class T, class Compare>
std::vector<TaggedSample<T>> merge_samples(std::span<const std::vector<TaggedSample<T>>> samples, Compare comp) {
    std::vector<MergeRun<TaggedSample<T>>> runs;
    std::size_t total = 0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        runs.push_back({k, samples[k]});
        total += samples[k].size();
    }
    std::vector<TaggedSample<T>> merged(total);
    multiway_merge(std::span<const MergeRun<TaggedSample<T>>>(runs), std::span<TaggedSample<T>>(merged),
                   tagged_less(comp));
    return merged;
}

/// `count` distinct positions drawn uniformly from [0, n), by a partial
/// Fisher-Yates shuffle over a virtual identity array (only touched slots are stored).
inline std::vector<std::size_t> sample_positions(std::size_t n, std::size_t count, SplitMix64& rng) {
    if (count > n) {
        throw ParameterError("sample of " + std::to_string(count) + " exceeds " + std::to_string(n) + " keys");
    }
    std::unordered_map<std::size_t, std::size_t> moved;
    moved.reserve(2 * count);
    auto slot = [&](std::size_t i) {
        auto it = moved.find(i);
        return it == moved.end() ? i : it->second;
    };
    std::vector<std::size_t> picked(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        const std::size_t at_j = slot(j);
        moved[j] = slot(i);
        picked[i] = at_j;
    }
    return picked;
}

/// Random oversample over all baseline-sorted sequences: p*s-1 keys drawn
/// without replacement, tagged, and sorted with `kind` under (key, seq, idx).
template <class T, class Compare>
std::vector<TaggedSample<T>> random_sample(std::span<const T> sorted_sequences, const BaselineLayout& layout,
                                           const RandomSampleParams& params, SplitMix64& rng, BaseSortKind kind,
                                           Compare comp) {
    if (params.p == 0 || params.s == 0) {
        throw ParameterError("random_sample: p and s must be positive");
    }
    const std::size_t count = params.sample_size();
    const auto positions = sample_positions(sorted_sequences.size(), count, rng);

    std::vector<TaggedSample<T>> sample;
    sample.reserve(count);
    for (auto g : positions) {
        const std::size_t k = layout.sequence_of(g);
        sample.push_back({sorted_sequences[g], k, g - layout.offset(k)});
    }
    base_sort(kind, std::span<TaggedSample<T>>(sample), tagged_less(comp));
    return sample;
}

template <class T>
struct SplitterSet {
    std::vector<TaggedSample<T>> splitters;

    std::size_t parts() const noexcept { return splitters.size() + 1; }
};

namespace detail {

template <class T>
SplitterSet<T> select_splitters_shifted(std::span<const TaggedSample<T>> sorted_sample, std::size_t p, std::size_t s,
                                        std::ptrdiff_t rank_shift) {
    if (p == 0 || s == 0) {
        throw ParameterError("select_splitters: p and s must be positive");
    }
    if (sorted_sample.size() < (p - 1) * s) {
        throw ParameterError("select_splitters: sample of " + std::to_string(sorted_sample.size()) +
                             " is smaller than (p-1)*s = " + std::to_string((p - 1) * s));
    }
    SplitterSet<T> set;
    set.splitters.reserve(p - 1);
    for (std::size_t i = 1; i < p; ++i) {
        auto rank = static_cast<std::ptrdiff_t>(i * s) - 1 + rank_shift;
        rank = std::clamp<std::ptrdiff_t>(rank, 0, static_cast<std::ptrdiff_t>(sorted_sample.size()) - 1);
        set.splitters.push_back(sorted_sample[static_cast<std::size_t>(rank)]);
    }
    return set;
}

} // namespace detail

/// Splitter i (1-based, i < p) is the (i*s)-th smallest sample, stored at index i*s-1.
template <class T>
SplitterSet<T> select_splitters(std::span<const TaggedSample<T>> sorted_sample, std::size_t p, std::size_t s) {
    return detail::select_splitters_shifted(sorted_sample, p, s, 0);
}

enum class SplitStrategy { binary_search, merge };

constexpr std::string_view to_string(SplitStrategy strategy) noexcept {
    return strategy == SplitStrategy::binary_search ? "binary-search" : "merge";
}

inline SplitStrategy parse_split_strategy(std::string_view name) {
    if (name == "binary-search" || name == "binary") return SplitStrategy::binary_search;
    if (name == "merge") return SplitStrategy::merge;
    throw UsageError("unknown split strategy '" + std::string(name) + "'");
}

namespace detail {

// True iff (key, seq, idx) <= splitter in the tagged order.
template <class T, class Compare>
bool at_or_before(const T& key, std::size_t seq, std::size_t idx, const TaggedSample<T>& splitter, Compare& comp) {
    if (comp(key, splitter.key)) return true;
    if (comp(splitter.key, key)) return false;
    if (seq != splitter.seq) return seq < splitter.seq;
    return idx <= splitter.idx;
}

} // namespace detail

/// Bucket boundaries of one sorted sequence: row[j+1] counts keys of the
/// sequence that are <= splitter j in the tagged order. row[0] = 0 and
/// row[p] = |sequence|.
template <class T, class Compare>
std::vector<std::size_t> split_around(std::span<const T> sorted_seq, std::size_t seq, const SplitterSet<T>& set,
                                      Compare comp, SplitStrategy strategy = SplitStrategy::binary_search) {
    const std::size_t parts = set.parts();
    std::vector<std::size_t> row(parts + 1, 0);
    row[parts] = sorted_seq.size();

    if (strategy == SplitStrategy::binary_search) {
        std::size_t from = 0;
        for (std::size_t j = 0; j + 1 < parts; ++j) {
            const auto& splitter = set.splitters[j];
            std::size_t lo = from;
            std::size_t hi = sorted_seq.size();
            while (lo < hi) {
                const std::size_t mid = lo + (hi - lo) / 2;
                if (detail::at_or_before(sorted_seq[mid], seq, mid, splitter, comp)) {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            row[j + 1] = lo;
            from = lo;
        }
    } else {
        std::size_t i = 0;
        for (std::size_t j = 0; j + 1 < parts; ++j) {
            const auto& splitter = set.splitters[j];
            while (i < sorted_seq.size() && detail::at_or_before(sorted_seq[i], seq, i, splitter, comp)) {
                ++i;
            }
            row[j + 1] = i;
        }
    }
    return row;
}

/// bounds(k, j) is where bucket j starts inside sorted sequence k.
class PartitionPlan {
public:
    explicit PartitionPlan(std::size_t parts) : parts_(parts), bounds_(parts * (parts + 1), 0) {}

    std::size_t parts() const noexcept { return parts_; }

    std::size_t& at(std::size_t k, std::size_t j) noexcept { return bounds_[k * (parts_ + 1) + j]; }
    std::size_t at(std::size_t k, std::size_t j) const noexcept { return bounds_[k * (parts_ + 1) + j]; }

    std::span<const std::size_t> row(std::size_t k) const noexcept {
        return std::span<const std::size_t>(bounds_).subspan(k * (parts_ + 1), parts_ + 1);
    }

    void set_row(std::size_t k, std::span<const std::size_t> row) {
        if (row.size() != parts_ + 1) {
            throw UsageError("PartitionPlan: row has wrong width");
        }
        std::copy(row.begin(), row.end(), bounds_.begin() + static_cast<std::ptrdiff_t>(k * (parts_ + 1)));
    }

    std::size_t piece(std::size_t k, std::size_t j) const noexcept { return at(k, j + 1) - at(k, j); }

    std::size_t bucket_size(std::size_t j) const noexcept {
        std::size_t total = 0;
        for (std::size_t k = 0; k < parts_; ++k) {
            total += piece(k, j);
        }
        return total;
    }

    std::vector<std::size_t> bucket_sizes() const {
        std::vector<std::size_t> sizes(parts_);
        for (std::size_t j = 0; j < parts_; ++j) {
            sizes[j] = bucket_size(j);
        }
        return sizes;
    }

private:
    std::size_t parts_;
    std::vector<std::size_t> bounds_;
};

/// Worst-case bucket size for regular oversampling with multiplier r:
/// n_max = (1 + 1/r) n/p + r p. Guaranteed when r^2 p^2 <= n.
struct BalanceBound {
    std::size_t n = 0;
    std::size_t p = 1;
    std::size_t r = 1;

    double n_max() const noexcept {
        return (1.0 + 1.0 / static_cast<double>(r)) * static_cast<double>(n) / static_cast<double>(p) +
               static_cast<double>(r * p);
    }

    /// ceil(n_max) in exact integer arithmetic: ceil((r+1) n / (r p)) + r p.
    std::size_t limit() const noexcept {
        const auto num = static_cast<unsigned __int128>(r + 1) * n;
        const auto den = static_cast<unsigned __int128>(r) * p;
        return static_cast<std::size_t>((num + den - 1) / den) + r * p;
    }

    bool applies() const noexcept {
        const auto rp = static_cast<unsigned __int128>(r) * p;
        return rp * rp <= n;
    }
};

struct BalanceReport {
    std::vector<std::size_t> sizes;
    std::size_t max_size = 0;
    /// max bucket / (n/p)
    double expansion = 0.0;
    std::optional<std::size_t> limit;
    bool within_bound = true;
};

/// Bucket sizes of `plan`. With a bound, passes iff every bucket is <= ceil(n_max);
/// without one (random sampling), only reports.
inline BalanceReport check_balance(const PartitionPlan& plan, std::optional<BalanceBound> bound = std::nullopt) {
    BalanceReport report;
    report.sizes = plan.bucket_sizes();
    std::size_t n = 0;
    for (auto size : report.sizes) {
        n += size;
        report.max_size = std::max(report.max_size, size);
    }
    if (n > 0) {
        report.expansion = static_cast<double>(report.max_size) * static_cast<double>(plan.parts()) /
                           static_cast<double>(n);
    }
    if (bound) {
        report.limit = bound->limit();
        report.within_bound = report.max_size <= *report.limit;
    }
    return report;
}

/// Checks that every key of bucket j precedes every key of bucket j+1 in the
/// tagged order. Returns the first bucket whose smallest key does not follow
/// the largest key of the nonempty buckets before it.
template <class T, class Compare>
std::optional<std::size_t> find_order_violation(std::span<const T> sorted_sequences, const BaselineLayout& layout,
                                                const PartitionPlan& plan, Compare comp) {
    const auto less = tagged_less(comp);
    std::optional<TaggedSample<T>> previous_max;
    for (std::size_t j = 0; j < plan.parts(); ++j) {
        std::optional<TaggedSample<T>> lo;
        std::optional<TaggedSample<T>> hi;
        for (std::size_t k = 0; k < plan.parts(); ++k) {
            if (plan.piece(k, j) == 0) {
                continue;
            }
            const std::size_t first = plan.at(k, j);
            const std::size_t last = plan.at(k, j + 1) - 1;
            const auto base = layout.offset(k);
            TaggedSample<T> a{sorted_sequences[base + first], k, first};
            TaggedSample<T> b{sorted_sequences[base + last], k, last};
            if (!lo || less(a, *lo)) lo = a;
            if (!hi || less(*hi, b)) hi = b;
        }
        if (!lo) {
            continue;
        }
        if (previous_max && !less(*previous_max, *lo)) {
            return j;
        }
        previous_max = hi;
    }
    return std::nullopt;
}

/// Checks each splitter against its rank: exactly i*s-1 samples strictly
/// precede splitter i (1-based) in the tagged order, allowing for duplicate
/// tags from padded positions. Returns the first offending splitter index.
template <class T, class Compare>
std::optional<std::size_t> find_rank_violation(std::span<const TaggedSample<T>> sorted_sample,
                                               const SplitterSet<T>& set, std::size_t s, Compare comp) {
    const auto less = tagged_less(comp);
    for (std::size_t i = 0; i < set.splitters.size(); ++i) {
        const auto& splitter = set.splitters[i];
        const auto below = static_cast<std::size_t>(
            std::lower_bound(sorted_sample.begin(), sorted_sample.end(), splitter, less) - sorted_sample.begin());
        const auto through = static_cast<std::size_t>(
            std::upper_bound(sorted_sample.begin(), sorted_sample.end(), splitter, less) - sorted_sample.begin());
        const std::size_t rank = (i + 1) * s; // 1-based
        if (!(below < rank && rank <= through)) {
            return i;
        }
    }
    return std::nullopt;
}

} // namespace ovsort
