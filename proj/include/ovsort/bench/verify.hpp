#pragma once

// Desk-scale property battery behind `--verify-only`. Each property prints
// one verdict line; two optional faults can be injected to show that the
// battery notices them.

#include <algorithm>
#include <chrono>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "ovsort/keys.hpp"
#include "ovsort/parallel.hpp"
#include "ovsort/partition.hpp"
#include "ovsort/pipeline.hpp"

namespace ovsort::bench {

struct VerifyOptions {
    /// Select splitters one rank too late.
    bool splitter_rank_fault = false;
    /// Request a stable sort from an unstable base sort.
    bool unstable_base_fault = false;
};

struct PropertyVerdict {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0;
};

namespace detail {

using VKey = Key<32>;

inline std::vector<VKey> verify_input(std::size_t n, Distribution dist, std::uint64_t seed) {
    return to_keys<32>(generate({n, 32, dist, 4, seed}));
}

inline constexpr Distribution kAllDistributions[] = {Distribution::uniform_bytes, Distribution::sorted,
                                                     Distribution::reverse_sorted, Distribution::constant,
                                                     Distribution::few_distinct};

inline std::string oracle_equivalence() {
    std::size_t runs = 0;
    for (auto dist : kAllDistributions) {
        for (std::size_t n : {0u, 1u, 1000u, 100000u}) {
            const auto keys = verify_input(n, dist, mix_seed({n, static_cast<std::uint64_t>(dist)}));
            auto expected = keys;
            std::stable_sort(expected.begin(), expected.end(), KeyLess{});
            for (std::size_t p : {1u, 4u, 64u}) {
                for (int mode = 0; mode < 3; ++mode) {
                    for (auto base : {BaseSortKind::qs, BaseSortKind::hs, BaseSortKind::rq, BaseSortKind::ref}) {
                        SortConfig cfg;
                        cfg.p = p;
                        cfg.base = base;
                        cfg.seed = runs;
                        if (mode < 2) cfg.mode = Deterministic{static_cast<std::size_t>(mode + 1)};
                        cfg = fit_to(cfg, n);
                        const auto result = sort(std::span<const VKey>(keys), cfg);
                        verify_sorted<32>(keys, result.keys, result.report);
                        if (result.keys != expected) {
                            return "mismatch with reference sort at n=" + std::to_string(n) + " p=" +
                                   std::to_string(cfg.p);
                        }
                        ++runs;
                    }
                }
            }
        }
    }
    // One run at the top of the desk-scale range.
    const auto big = verify_input(1000000, Distribution::uniform_bytes, 99);
    SortConfig cfg;
    cfg.p = 256;
    cfg.mode = Deterministic{1};
    sort_with_oracle_check<32>(big, cfg);
    ++runs;
    return "";
}

inline std::string balance_bound() {
    SplitMix64 rng(0xba1a);
    std::size_t runs = 0;
    while (runs < 200) {
        const std::size_t p = 2 + rng.below(127);
        const std::size_t r = 1 + rng.below(5);
        const std::size_t n = r * r * p * p + rng.below(200000);
        if (n > 400000) continue;
        SortConfig cfg;
        cfg.p = p;
        cfg.mode = Deterministic{r};
        const auto dist = kAllDistributions[rng.below(5)];
        const auto keys = to_keys<8>(generate({n, 8, dist, 1 + rng.below(8), rng()}));
        const auto result = sort(std::span<const Key<8>>(keys), cfg);
        const BalanceBound bound{n, p, r};
        for (auto size : result.report.bucket_sizes) {
            if (size > bound.limit()) {
                return "bucket " + std::to_string(size) + " > " + std::to_string(bound.limit()) + " at n=" +
                       std::to_string(n) + " p=" + std::to_string(p) + " r=" + std::to_string(r);
            }
        }
        ++runs;
    }
    return "";
}

struct Item {
    Key<8> key;
    std::uint32_t position;
};

inline std::string stability(BaseSortKind base) {
    const auto keys = to_keys<8>(generate({100000, 8, Distribution::few_distinct, 4, 7}));
    std::vector<Item> items(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) items[i] = {keys[i], static_cast<std::uint32_t>(i)};
    const auto by_key = [](const Item& a, const Item& b) { return KeyLess{}(a.key, b.key); };
    for (std::size_t p : {4u, 64u, 256u}) {
        SortConfig cfg;
        cfg.p = p;
        cfg.mode = Deterministic{1};
        cfg.base = base;
        cfg.stable = true;
        const auto out = sort(std::span<const Item>(items), cfg, by_key).keys;
        for (std::size_t i = 1; i < out.size(); ++i) {
            if (by_key(out[i], out[i - 1]) ||
                (!by_key(out[i - 1], out[i]) && out[i - 1].position > out[i].position)) {
                return "equal keys reordered at output index " + std::to_string(i) + " (p=" + std::to_string(p) + ")";
            }
        }
    }
    return "";
}

inline std::string random_balance() {
    const std::size_t n = 100000, p = 16;
    const double threshold = 1.5 * static_cast<double>(n - p + 1) / static_cast<double>(p);
    std::size_t bad = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const auto keys = to_keys<8>(generate({n, 8, Distribution::uniform_bytes, 4, mix_seed({trial, 1})}));
        SortConfig cfg;
        cfg.p = p;
        cfg.seed = mix_seed({trial, 2});
        const auto result = sort(std::span<const Key<8>>(keys), cfg);
        const auto worst = *std::max_element(result.report.bucket_sizes.begin(), result.report.bucket_sizes.end());
        if (static_cast<double>(worst) > threshold) ++bad;
    }
    if (bad > 5) return std::to_string(bad) + " of 100 trials exceeded 1.5 (n-p+1)/p";
    return "";
}

inline std::string parallel_determinism() {
    const auto keys = verify_input(200000, Distribution::few_distinct, 5);
    for (int deterministic = 0; deterministic < 2; ++deterministic) {
        SortConfig inner;
        inner.p = 64;
        inner.seed = 42;
        if (deterministic) inner.mode = Deterministic{2};
        const auto expected = sort(std::span<const VKey>(keys), inner).keys;
        for (std::size_t t : {1u, 2u, 4u, 8u}) {
            for (bool pm : {false, true}) {
                const auto got = mc_sort(std::span<const VKey>(keys), ParallelConfig{t, pm, inner}).keys;
                if (got != expected) return "t=" + std::to_string(t) + " differs from sequential output";
            }
        }
    }
    return "";
}

inline std::string order_separation(std::ptrdiff_t rank_shift) {
    SplitMix64 rng(0x5e9);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 50000;
        const std::size_t p = std::size_t{4} << (trial % 5);
        const auto dist = kAllDistributions[trial % 5];
        auto keys = to_keys<8>(generate({n, 8, dist, 6, rng()}));
        const BaselineLayout layout(n, p);
        for (std::size_t k = 0; k < p; ++k) {
            auto seq = layout.sequence(std::span<Key<8>>(keys), k);
            std::sort(seq.begin(), seq.end(), KeyLess{});
        }
        SortConfig cfg;
        cfg.p = p;
        cfg.seed = rng();
        if (trial % 2) cfg.mode = Deterministic{1 + static_cast<std::size_t>(trial % 3)};
        const std::span<const Key<8>> sorted(keys);
        const auto part = ovsort::detail::plan_partition_shifted(sorted, layout, cfg, KeyLess{}, rank_shift, nullptr);
        if (auto j = find_order_violation(sorted, layout, part.plan, KeyLess{})) {
            return "bucket " + std::to_string(*j) + " overlaps its predecessor";
        }
        if (auto i = find_rank_violation(std::span<const TaggedSample<Key<8>>>(part.sample), part.splitters,
                                         part.oversampling, KeyLess{})) {
            return "splitter " + std::to_string(*i + 1) + " is not the sample of rank " +
                   std::to_string((*i + 1) * part.oversampling) + " (p=" + std::to_string(p) + ")";
        }
    }
    return "";
}

inline std::string config_guard() {
    SortConfig cfg;
    cfg.p = 4;
    cfg.stable = true;
    for (auto base : {BaseSortKind::qs, BaseSortKind::hs, BaseSortKind::rq}) {
        cfg.base = base;
        try {
            validate(cfg, 1000);
            return "stable request with base '" + std::string(to_string(base)) + "' was accepted";
        } catch (const ParameterError&) {
        }
    }
    return "";
}

} // namespace detail

/// Runs the property battery, writing one verdict line per property to `out`.
inline std::vector<PropertyVerdict> verify_suite(std::ostream& out, const VerifyOptions& options = {}) {
    const std::vector<std::pair<std::string, std::function<std::string()>>> properties{
        {"oracle equivalence (5 distributions, n<=1e6, 4 base sorts)", detail::oracle_equivalence},
        {"regular-sampling bucket bound (200 runs)", detail::balance_bound},
        {"stability with a stable base sort", [&] {
             return detail::stability(options.unstable_base_fault ? BaseSortKind::qs : BaseSortKind::ref);
         }},
        {"random-sampling balance (100 seeded trials)", detail::random_balance},
        {"parallel determinism (t in 1,2,4,8)", detail::parallel_determinism},
        {"bucket order separation and splitter ranks",
         [&] { return detail::order_separation(options.splitter_rank_fault ? 1 : 0); }},
        {"stable request rejected for unstable bases", detail::config_guard},
    };

    std::vector<PropertyVerdict> verdicts;
    for (const auto& [name, check] : properties) {
        PropertyVerdict v{name, false, "", 0};
        const auto start = std::chrono::steady_clock::now();
        try {
            v.detail = check();
            v.passed = v.detail.empty();
        } catch (const ParameterError& e) {
            v.detail = std::string("configuration rejected: ") + e.what();
        } catch (const std::exception& e) {
            v.detail = e.what();
        }
        v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out << (v.passed ? "PASS  " : "FAIL  ") << v.name << " [" << std::fixed << std::setprecision(1) << v.seconds
            << " s]" << std::defaultfloat;
        if (!v.detail.empty()) out << ": " << v.detail;
        out << "\n";
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

inline bool all_passed(const std::vector<PropertyVerdict>& verdicts) {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.passed; });
}

} // namespace ovsort::bench
