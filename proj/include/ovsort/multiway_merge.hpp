#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ovsort/errors.hpp"

namespace ovsort {

/// One sorted input of a multiway merge. `source` orders equal keys across runs.
template <class T>
struct MergeRun {
    std::size_t source = 0;
    std::span<const T> keys;
};

namespace detail {

template <class T, class Compare>
std::size_t merge_two(const T* a, const T* a_end, const T* b, const T* b_end, T* out, Compare& comp) {
    T* const start = out;
    while (a != a_end && b != b_end) {
        // `a` comes from the lower source, so it wins ties.
        if (comp(*b, *a)) {
            *out++ = *b++;
        } else {
            *out++ = *a++;
        }
    }
    out = std::copy(a, a_end, out);
    out = std::copy(b, b_end, out);
    return static_cast<std::size_t>(out - start);
}

// Tournament tree of losers over k >= 3 runs. Leaves are padded to a power of
// two with permanently exhausted runs; matches involving an exhausted leaf are
// decided without calling the comparator. Building costs at most k-1
// comparisons and each emitted key at most ceil(lg k) more.
template <class T, class Compare>
class LoserTree {
public:
    LoserTree(std::span<const MergeRun<T>> runs, Compare& comp)
        : comp_(comp), leaves_(std::bit_ceil(runs.size())), cursor_(leaves_), end_(leaves_), losers_(leaves_) {
        for (std::size_t i = 0; i < runs.size(); ++i) {
            cursor_[i] = runs[i].keys.data();
            end_[i] = runs[i].keys.data() + runs[i].keys.size();
        }
        std::vector<std::size_t> winners(2 * leaves_);
        for (std::size_t i = 0; i < leaves_; ++i) {
            winners[leaves_ + i] = i;
        }
        for (std::size_t node = leaves_ - 1; node >= 1; --node) {
            const std::size_t left = winners[2 * node];
            const std::size_t right = winners[2 * node + 1];
            if (beats(right, left)) {
                winners[node] = right;
                losers_[node] = left;
            } else {
                winners[node] = left;
                losers_[node] = right;
            }
        }
        winner_ = winners[1];
    }

    bool empty() const noexcept { return exhausted(winner_); }

    const T& top() const noexcept { return *cursor_[winner_]; }

    void pop() {
        std::size_t candidate = winner_;
        ++cursor_[candidate];
        for (std::size_t node = (leaves_ + candidate) / 2; node >= 1; node /= 2) {
            if (beats(losers_[node], candidate)) {
                std::swap(losers_[node], candidate);
            }
        }
        winner_ = candidate;
    }

private:
    bool exhausted(std::size_t leaf) const noexcept { return cursor_[leaf] == end_[leaf]; }

    // Strict "a is emitted before b": smaller key, or equal key from a lower leaf.
    bool beats(std::size_t a, std::size_t b) {
        if (exhausted(a)) return false;
        if (exhausted(b)) return true;
        if (a < b) {
            return !comp_(*cursor_[b], *cursor_[a]);
        }
        return comp_(*cursor_[a], *cursor_[b]);
    }

    Compare& comp_;
    std::size_t leaves_;
    std::vector<const T*> cursor_;
    std::vector<const T*> end_;
    std::vector<std::size_t> losers_;
    std::size_t winner_ = 0;
};

} // namespace detail

/// Stable k-way merge of sorted runs into `out`. Equal keys are emitted by
/// ascending `source`, then by position within their run. Returns the number
/// of keys written.
template <class T, class Compare>
std::size_t multiway_merge(std::span<const MergeRun<T>> runs, std::span<T> out, Compare comp) {
    std::size_t total = 0;
    for (const auto& run : runs) {
        total += run.keys.size();
    }
    if (out.size() < total) {
        throw CapacityError("multiway_merge: output holds " + std::to_string(out.size()) + " keys, runs total " +
                            std::to_string(total));
    }

    std::vector<MergeRun<T>> live;
    live.reserve(runs.size());
    for (const auto& run : runs) {
        if (!run.keys.empty()) {
            live.push_back(run);
        }
    }
    std::stable_sort(live.begin(), live.end(),
                     [](const MergeRun<T>& a, const MergeRun<T>& b) { return a.source < b.source; });

    switch (live.size()) {
    case 0: return 0;
    case 1: std::copy(live[0].keys.begin(), live[0].keys.end(), out.begin()); return total;
    case 2: {
        const auto& a = live[0].keys;
        const auto& b = live[1].keys;
        return detail::merge_two(a.data(), a.data() + a.size(), b.data(), b.data() + b.size(), out.data(), comp);
    }
    default: break;
    }

    detail::LoserTree<T, Compare> tree(std::span<const MergeRun<T>>(live), comp);
    T* dst = out.data();
    while (!tree.empty()) {
        *dst++ = tree.top();
        tree.pop();
    }
    return total;
}

template <class T, class Compare>
std::size_t multiway_merge(const std::vector<MergeRun<T>>& runs, std::span<T> out, Compare comp) {
    return multiway_merge(std::span<const MergeRun<T>>(runs), out, comp);
}

} // namespace ovsort
