#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "ovsort/errors.hpp"

namespace ovsort {

/// The pluggable sequential sort applied to each sequence (and to random samples).
enum class BaseSortKind {
    qs,  ///< standard library introsort (std::sort)
    hs,  ///< bottom-up heapsort
    rq,  ///< recursive median-of-three quicksort with a heapsort guard
    ref, ///< std::stable_sort; the trusted stable reference
};

constexpr bool is_stable(BaseSortKind kind) noexcept { return kind == BaseSortKind::ref; }

constexpr std::string_view to_string(BaseSortKind kind) noexcept {
    switch (kind) {
    case BaseSortKind::qs: return "qs";
    case BaseSortKind::hs: return "hs";
    case BaseSortKind::rq: return "rq";
    case BaseSortKind::ref: return "ref";
    }
    return "?";
}

inline BaseSortKind parse_base_sort(std::string_view name) {
    if (name == "qs") return BaseSortKind::qs;
    if (name == "hs") return BaseSortKind::hs;
    if (name == "rq") return BaseSortKind::rq;
    if (name == "ref") return BaseSortKind::ref;
    throw UsageError("unknown base sort '" + std::string(name) + "' (expected qs, hs, rq or ref)");
}

namespace detail {

// Sift the root down along the path of larger children to a leaf, then climb
// back to where the root value belongs (Wegener's bottom-up variant). Uses
// about n lg n + O(n) comparisons instead of the 2 n lg n of the textbook sift.
template <class It, class Compare>
void sift_bottom_up(It first, std::size_t root, std::size_t n, Compare& comp) {
    std::size_t j = root;
    while (2 * j + 2 < n) {
        j = comp(first[2 * j + 1], first[2 * j + 2]) ? 2 * j + 2 : 2 * j + 1;
    }
    if (2 * j + 1 < n) {
        j = 2 * j + 1;
    }
    while (comp(first[j], first[root])) {
        j = (j - 1) / 2;
    }
    auto carried = std::move(first[j]);
    first[j] = std::move(first[root]);
    while (j > root) {
        j = (j - 1) / 2;
        std::swap(carried, first[j]);
    }
}

template <class It, class Compare>
void insertion_sort(It first, It last, Compare& comp) {
    if (first == last) {
        return;
    }
    for (It i = std::next(first); i != last; ++i) {
        auto value = std::move(*i);
        It j = i;
        while (j != first && comp(value, *std::prev(j))) {
            *j = std::move(*std::prev(j));
            --j;
        }
        *j = std::move(value);
    }
}

inline constexpr std::ptrdiff_t kInsertionCutoff = 16;

template <class It, class Compare>
void heapsort_impl(It first, It last, Compare& comp);

template <class It, class Compare>
void quicksort_loop(It first, It last, int depth_budget, Compare& comp) {
    while (last - first > kInsertionCutoff) {
        if (depth_budget == 0) {
            heapsort_impl(first, last, comp);
            return;
        }
        --depth_budget;

        // Median of three leaves *first <= pivot <= *(last-1), which act as
        // sentinels for the unguarded scans below.
        It mid = first + (last - first) / 2;
        It back = last - 1;
        if (comp(*mid, *first)) std::iter_swap(mid, first);
        if (comp(*back, *mid)) {
            std::iter_swap(back, mid);
            if (comp(*mid, *first)) std::iter_swap(mid, first);
        }
        const auto pivot = *mid;

        It i = first;
        It j = back;
        for (;;) {
            do ++i; while (comp(*i, pivot));
            do --j; while (comp(pivot, *j));
            if (i >= j) break;
            std::iter_swap(i, j);
        }
        // [first, i) <= pivot <= [i, last); both sides nonempty.
        if (i - first < last - i) {
            quicksort_loop(first, i, depth_budget, comp);
            first = i;
        } else {
            quicksort_loop(i, last, depth_budget, comp);
            last = i;
        }
    }
    insertion_sort(first, last, comp);
}

template <class It, class Compare>
void heapsort_impl(It first, It last, Compare& comp) {
    const auto n = static_cast<std::size_t>(last - first);
    if (n < 2) {
        return;
    }
    for (std::size_t i = n / 2; i-- > 0;) {
        sift_bottom_up(first, i, n, comp);
    }
    for (std::size_t end = n - 1; end > 0; --end) {
        std::iter_swap(first, first + static_cast<std::ptrdiff_t>(end));
        sift_bottom_up(first, 0, end, comp);
    }
}

} // namespace detail

template <class It, class Compare>
void heapsort(It first, It last, Compare comp) {
    detail::heapsort_impl(first, last, comp);
}

/// Median-of-three quicksort, insertion sort below 16 elements, heapsort once
/// recursion depth exceeds 2*floor(lg n).
template <class It, class Compare>
void quicksort(It first, It last, Compare comp) {
    const auto n = static_cast<std::size_t>(last - first);
    if (n < 2) {
        return;
    }
    const int depth_budget = 2 * (std::bit_width(n) - 1);
    detail::quicksort_loop(first, last, depth_budget, comp);
}

/// Sorts `span` in place with the selected algorithm. Only `ref` is stable.
template <class T, class Compare>
void base_sort(BaseSortKind kind, std::span<T> span, Compare comp) {
    switch (kind) {
    case BaseSortKind::qs: std::sort(span.begin(), span.end(), comp); return;
    case BaseSortKind::hs: heapsort(span.begin(), span.end(), comp); return;
    case BaseSortKind::rq: quicksort(span.begin(), span.end(), comp); return;
    case BaseSortKind::ref: std::stable_sort(span.begin(), span.end(), comp); return;
    }
}

} // namespace ovsort
