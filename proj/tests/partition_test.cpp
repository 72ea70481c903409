#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <vector>

#include "ovsort/partition.hpp"
#include "ovsort/pipeline.hpp"
#include "test_support.hpp"

namespace ovsort {
namespace {

using testing::Key8;
using testing::key_of;
using testing::keys_of;

// Independent (key, seq, idx) order built from the three-way compare.
bool tuple_le(const Key8& key, std::size_t seq, std::size_t idx, const TaggedSample<Key8>& s) {
    const auto c = key <=> s.key;
    if (c != 0) return c < 0;
    return std::tie(seq, idx) <= std::tie(s.seq, s.idx);
}

// Brute-force split: classify every key by scanning the splitters.
std::vector<std::size_t> classify_row(std::span<const Key8> seq_keys, std::size_t seq,
                                      const SplitterSet<Key8>& set) {
    const std::size_t parts = set.parts();
    std::vector<std::size_t> counts(parts, 0);
    for (std::size_t i = 0; i < seq_keys.size(); ++i) {
        std::size_t bucket = parts - 1;
        for (std::size_t j = 0; j + 1 < parts; ++j) {
            if (tuple_le(seq_keys[i], seq, i, set.splitters[j])) {
                bucket = j;
                break;
            }
        }
        ++counts[bucket];
    }
    std::vector<std::size_t> row(parts + 1, 0);
    for (std::size_t j = 0; j < parts; ++j) row[j + 1] = row[j] + counts[j];
    return row;
}

// Baseline-sort `keys` under layout (n, p) in place.
void baseline_sort(std::vector<Key8>& keys, const BaselineLayout& layout) {
    for (std::size_t k = 0; k < layout.sequences(); ++k) {
        auto seq = layout.sequence(std::span<Key8>(keys), k);
        std::sort(seq.begin(), seq.end(), KeyLess{});
    }
}

TEST(BaselineLayout, SizesOffsetsAndLookup) {
    for (std::size_t n : {0u, 1u, 7u, 64u, 1000u, 1003u}) {
        for (std::size_t p : {1u, 2u, 3u, 8u, 64u}) {
            const BaselineLayout layout(n, p);
            std::size_t offset = 0;
            for (std::size_t k = 0; k < p; ++k) {
                EXPECT_EQ(layout.offset(k), offset);
                EXPECT_TRUE(layout.size(k) == n / p || layout.size(k) == n / p + 1);
                if (k > 0) {
                    EXPECT_LE(layout.size(k), layout.size(k - 1));
                }
                for (std::size_t i = 0; i < layout.size(k); ++i) {
                    ASSERT_EQ(layout.sequence_of(offset + i), k);
                }
                offset += layout.size(k);
            }
            EXPECT_EQ(offset, n);
            EXPECT_EQ(layout.max_size(), (n + p - 1) / p);
        }
    }
    EXPECT_THROW(BaselineLayout(5, 0), ParameterError);
}

TEST(RegularSample, FourKeysTwoParts) {
    // n = 8, p = 2: ceil(n/p) = 4, s = 2, x = 2. Position 2 -> key 20 (idx 1); max 40 (idx 3).
    const auto seq = keys_of({10, 20, 30, 40});
    const auto sample = regular_sample(std::span<const Key8>(seq), 1, {2, 1}, 8);
    ASSERT_EQ(sample.size(), 2u);
    EXPECT_EQ(sample[0].key, key_of(20));
    EXPECT_EQ(sample[0].idx, 1u);
    EXPECT_EQ(sample[1].key, key_of(40));
    EXPECT_EQ(sample[1].idx, 3u);
    EXPECT_EQ(sample[0].seq, 1u);
}

TEST(RegularSample, IdenticalKeysAreDistinguishedByIndex) {
    // n = p*s keys, so x = 1 and every position is sampled once.
    const std::size_t p = 4, r = 2, s = r * p;
    const std::vector<Key8> seq(s, key_of(9));
    const auto sample = regular_sample(std::span<const Key8>(seq), 0, {p, r}, p * s);
    ASSERT_EQ(sample.size(), s);
    std::set<std::size_t> idx;
    for (const auto& t : sample) idx.insert(t.idx);
    EXPECT_EQ(idx.size(), s);
}

TEST(RegularSample, SegmentPositions) {
    // n/p = 1000, p = 8, r = 2: s = 16, x = ceil(1000/16) = 63.
    auto seq = testing::random_keys<8>(1000, 5);
    std::sort(seq.begin(), seq.end(), KeyLess{});
    const auto sample = regular_sample(std::span<const Key8>(seq), 3, {8, 2}, 8000);
    ASSERT_EQ(sample.size(), 16u);
    for (std::size_t j = 0; j < 15; ++j) {
        EXPECT_EQ(sample[j].idx, (j + 1) * 63 - 1);
        EXPECT_EQ(sample[j].key, seq[sample[j].idx]);
    }
    EXPECT_EQ(sample[15].idx, 999u);
    // Last segment is the short one: 1000 - 15 * 63 = 55 keys.
    EXPECT_EQ(1000 - (sample[14].idx + 1), 55u);
}

TEST(RegularSample, ShortSequenceClampsToMaximum) {
    // n = 10, p = 2 pads to 5 per sequence; s = 4, x = 2; a 3-key sequence reads
    // positions 2, 4, 6 -> idx 1, 2 (clamped), 2 (clamped) then the max.
    const auto seq = keys_of({1, 2, 3});
    const auto sample = regular_sample(std::span<const Key8>(seq), 0, {2, 2}, 10);
    ASSERT_EQ(sample.size(), 4u);
    EXPECT_EQ(sample[0].idx, 1u);
    EXPECT_EQ(sample[1].idx, 2u);
    EXPECT_EQ(sample[2].idx, 2u);
    EXPECT_EQ(sample[3].idx, 2u);
    EXPECT_THROW(regular_sample(std::span<const Key8>(), 0, {2, 1}, 4), ParameterError);
}

TEST(MergeSamples, Basics) {
    const auto less = tagged_less(KeyLess{});
    std::vector<std::vector<TaggedSample<Key8>>> one{{{key_of(1), 0, 0}, {key_of(5), 0, 1}}};
    const auto merged_one = merge_samples(std::span<const std::vector<TaggedSample<Key8>>>(one), KeyLess{});
    ASSERT_EQ(merged_one.size(), 2u);
    EXPECT_EQ(merged_one[1].key, key_of(5));

    std::vector<std::vector<TaggedSample<Key8>>> two{{{key_of(7), 0, 0}}, {{key_of(3), 1, 0}}};
    const auto merged_two = merge_samples(std::span<const std::vector<TaggedSample<Key8>>>(two), KeyLess{});
    ASSERT_EQ(merged_two.size(), 2u);
    EXPECT_TRUE(less(merged_two[0], merged_two[1]));
    EXPECT_EQ(merged_two[0].seq, 1u);
}

TEST(MergeSamples, MatchesSortedConcatenation) {
    const std::size_t p = 16, r = 2;
    const std::size_t n = 16 * 500;
    auto keys = testing::random_keys<8>(n, 17, Distribution::few_distinct, 20);
    const BaselineLayout layout(n, p);
    baseline_sort(keys, layout);
    std::vector<std::vector<TaggedSample<Key8>>> per_seq(p);
    std::vector<TaggedSample<Key8>> expected;
    for (std::size_t k = 0; k < p; ++k) {
        per_seq[k] = regular_sample(layout.sequence(std::span<const Key8>(keys), k), k, {p, r}, n);
        expected.insert(expected.end(), per_seq[k].begin(), per_seq[k].end());
    }
    const auto less = tagged_less(KeyLess{});
    std::sort(expected.begin(), expected.end(), less);
    const auto merged = merge_samples(std::span<const std::vector<TaggedSample<Key8>>>(per_seq), KeyLess{});
    ASSERT_EQ(merged.size(), r * p * p);
    for (std::size_t i = 0; i < merged.size(); ++i) {
        ASSERT_EQ(merged[i].key, expected[i].key);
        ASSERT_EQ(merged[i].seq, expected[i].seq);
        ASSERT_EQ(merged[i].idx, expected[i].idx);
    }
}

TEST(RandomSample, ExhaustiveSampleIsWholeInputSorted) {
    // p*s - 1 = n: every key is drawn.
    const std::size_t p = 4, s = 8, n = p * s - 1;
    auto keys = testing::random_keys<8>(n, 2, Distribution::few_distinct, 3);
    const BaselineLayout layout(n, p);
    baseline_sort(keys, layout);
    SplitMix64 rng(1);
    const auto sample =
        random_sample(std::span<const Key8>(keys), layout, {p, s}, rng, BaseSortKind::qs, KeyLess{});
    ASSERT_EQ(sample.size(), n);
    auto expected = keys;
    std::sort(expected.begin(), expected.end(), KeyLess{});
    std::set<std::pair<std::size_t, std::size_t>> tags;
    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_EQ(sample[i].key, expected[i]);
        tags.insert({sample[i].seq, sample[i].idx});
        EXPECT_EQ(keys[layout.offset(sample[i].seq) + sample[i].idx], sample[i].key);
    }
    EXPECT_EQ(tags.size(), n);
    EXPECT_TRUE(std::is_sorted(sample.begin(), sample.end(), tagged_less(KeyLess{})));
}

TEST(RandomSample, DeterministicInSeed) {
    const std::size_t n = 5000;
    auto keys = testing::random_keys<8>(n, 3);
    const BaselineLayout layout(n, 8);
    baseline_sort(keys, layout);
    SplitMix64 a(99), b(99);
    const auto x = random_sample(std::span<const Key8>(keys), layout, {8, 10}, a, BaseSortKind::hs, KeyLess{});
    const auto y = random_sample(std::span<const Key8>(keys), layout, {8, 10}, b, BaseSortKind::hs, KeyLess{});
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(x[i].seq, y[i].seq);
        EXPECT_EQ(x[i].idx, y[i].idx);
    }
}

TEST(RandomSample, TooLargeIsParameterError) {
    std::vector<Key8> keys(10);
    const BaselineLayout layout(10, 2);
    SplitMix64 rng(1);
    EXPECT_THROW(random_sample(std::span<const Key8>(keys), layout, {2, 6}, rng, BaseSortKind::qs, KeyLess{}),
                 ParameterError);
}

TEST(RandomSample, InclusionFrequencyIsUniform) {
    // n = 1e4, p = 8, s = 64: 511 positions per draw. Over 1000 draws each
    // position's count is binomial-like with mean 51.1; at most ~0.3% of
    // positions should fall outside 3 sigma.
    const std::size_t n = 10000, draws = 1000, m = 8 * 64 - 1;
    std::vector<std::size_t> hits(n, 0);
    SplitMix64 rng(2024);
    for (std::size_t t = 0; t < draws; ++t) {
        for (auto g : sample_positions(n, m, rng)) ++hits[g];
    }
    const double q = static_cast<double>(m) / n;
    const double mean = draws * q;
    const double sigma = std::sqrt(draws * q * (1 - q));
    std::size_t outside = 0;
    for (auto h : hits) {
        if (std::abs(static_cast<double>(h) - mean) > 3 * sigma) ++outside;
    }
    EXPECT_LE(outside, n / 100);
}

TEST(RandomSample, PositionsAreDistinct) {
    SplitMix64 rng(5);
    for (std::size_t n : {1u, 10u, 1000u}) {
        for (std::size_t m : {std::size_t{0}, n / 2, n}) {
            const auto picked = sample_positions(n, m, rng);
            std::set<std::size_t> unique(picked.begin(), picked.end());
            EXPECT_EQ(unique.size(), m);
            if (!picked.empty()) {
                EXPECT_LT(*unique.rbegin(), n);
            }
        }
    }
}

std::vector<TaggedSample<Key8>> tagged_range(std::size_t count) {
    std::vector<TaggedSample<Key8>> t;
    for (std::size_t i = 1; i <= count; ++i) t.push_back({key_of(i), 0, i - 1});
    return t;
}

TEST(SelectSplitters, RankFormula) {
    const auto six = tagged_range(6);
    const auto one = select_splitters(std::span<const TaggedSample<Key8>>(six), 2, 3);
    ASSERT_EQ(one.splitters.size(), 1u);
    EXPECT_EQ(one.splitters[0].key, key_of(3));

    // p = 4, r = 1: s = 4, |T| = 16, splitters at ranks 4, 8, 12.
    const auto sixteen = tagged_range(16);
    const auto three = select_splitters(std::span<const TaggedSample<Key8>>(sixteen), 4, 4);
    ASSERT_EQ(three.splitters.size(), 3u);
    EXPECT_EQ(three.splitters[0].key, key_of(4));
    EXPECT_EQ(three.splitters[1].key, key_of(8));
    EXPECT_EQ(three.splitters[2].key, key_of(12));
    EXPECT_FALSE(find_rank_violation(std::span<const TaggedSample<Key8>>(sixteen), three, 4, KeyLess{}));

    EXPECT_TRUE(select_splitters(std::span<const TaggedSample<Key8>>(six), 1, 3).splitters.empty());
    EXPECT_THROW(select_splitters(std::span<const TaggedSample<Key8>>(six), 4, 3), ParameterError);
}

TEST(SelectSplitters, OffByOneRankIsDetected) {
    const auto sixteen = tagged_range(16);
    const std::span<const TaggedSample<Key8>> sample(sixteen);
    for (std::ptrdiff_t shift : {-1, 1}) {
        const auto bad = detail::select_splitters_shifted(sample, 4, 4, shift);
        EXPECT_TRUE(find_rank_violation(sample, bad, 4, KeyLess{}).has_value());
    }
}

TEST(SplitAround, SinglePartIsWholeSequence) {
    const auto seq = keys_of({1, 2, 3});
    const auto row = split_around(std::span<const Key8>(seq), 0, SplitterSet<Key8>{}, KeyLess{});
    EXPECT_EQ(row, (std::vector<std::size_t>{0, 3}));
}

TEST(SplitAround, EqualKeysResolvedBySequenceAndIndex) {
    const std::vector<Key8> seq(10, key_of(5));
    for (auto strategy : {SplitStrategy::binary_search, SplitStrategy::merge}) {
        // Splitter from a later sequence: all of sequence 2 is at or before it.
        SplitterSet<Key8> later{{{key_of(5), 3, 0}}};
        EXPECT_EQ(split_around(std::span<const Key8>(seq), 2, later, KeyLess{}, strategy)[1], 10u);
        // From an earlier sequence: everything lands to the right.
        SplitterSet<Key8> earlier{{{key_of(5), 1, 9}}};
        EXPECT_EQ(split_around(std::span<const Key8>(seq), 2, earlier, KeyLess{}, strategy)[1], 0u);
        // Same sequence at idx 4: positions 0..4 go left.
        SplitterSet<Key8> same{{{key_of(5), 2, 4}}};
        EXPECT_EQ(split_around(std::span<const Key8>(seq), 2, same, KeyLess{}, strategy)[1], 5u);
    }
}

TEST(SplitAround, MatchesLinearScanOracle) {
    SplitMix64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t len = rng.below(300);
        const std::size_t distinct = 1 + rng.below(20);
        std::vector<Key8> seq(len);
        for (auto& k : seq) k = key_of(rng.below(distinct));
        std::sort(seq.begin(), seq.end(), KeyLess{});
        const std::size_t seq_id = rng.below(8);

        std::vector<TaggedSample<Key8>> splitters(1 + rng.below(15));
        for (auto& s : splitters) s = {key_of(rng.below(distinct)), rng.below(8), rng.below(300)};
        std::sort(splitters.begin(), splitters.end(), tagged_less(KeyLess{}));
        const SplitterSet<Key8> set{splitters};

        const auto expected = classify_row(seq, seq_id, set);
        for (auto strategy : {SplitStrategy::binary_search, SplitStrategy::merge}) {
            ASSERT_EQ(split_around(std::span<const Key8>(seq), seq_id, set, KeyLess{}, strategy), expected);
        }
    }
}

TEST(BalanceBound, WorkedExample) {
    // n = 1000, p = 4, r = 1: (1 + 1/1) * 250 + 1 * 4 = 504.
    const BalanceBound bound{1000, 4, 1};
    EXPECT_DOUBLE_EQ(bound.n_max(), 504.0);
    EXPECT_EQ(bound.limit(), 504u);
    EXPECT_TRUE(bound.applies());
    // Non-integral n/p rounds up: n = 1001, p = 4, r = 3 -> 4/3 * 250.25 + 12 = 345.67 -> 346.
    EXPECT_EQ((BalanceBound{1001, 4, 3}.limit()), 346u);
    EXPECT_FALSE((BalanceBound{1000, 16, 2}.applies()));
}

TEST(BalanceBound, SinglePart) {
    PartitionPlan plan(1);
    plan.at(0, 1) = 777;
    const auto report = check_balance(plan, BalanceBound{777, 1, 2});
    EXPECT_EQ(report.sizes, std::vector<std::size_t>{777});
    EXPECT_TRUE(report.within_bound);
    EXPECT_DOUBLE_EQ(report.expansion, 1.0);
}

struct Instance {
    std::vector<Key8> keys;
    BaselineLayout layout;
    PartitionResult<Key8> partition;
};

Instance build(std::size_t n, std::size_t p, const SortConfig& cfg, Distribution dist, std::uint64_t seed) {
    auto keys = testing::random_keys<8>(n, seed, dist, 3);
    const BaselineLayout layout(n, p);
    baseline_sort(keys, layout);
    auto partition = plan_partition(std::span<const Key8>(keys), layout, cfg, KeyLess{});
    return Instance{std::move(keys), layout, std::move(partition)};
}

TEST(Partition, DeterministicPlansRespectBoundAndOracle) {
    // 200 regular-sampling instances at n = 1e5; p in {16, 64}, r in 1..5.
    SplitMix64 rng(600);
    std::size_t violations = 0;
    const Distribution dists[] = {Distribution::uniform_bytes, Distribution::few_distinct, Distribution::sorted,
                                  Distribution::reverse_sorted, Distribution::constant};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 100000;
        const std::size_t p = trial % 2 ? 64 : 16;
        const std::size_t r = 1 + rng.below(5);
        SortConfig cfg;
        cfg.p = p;
        cfg.mode = Deterministic{r};
        const auto inst = build(n, p, cfg, dists[trial % 5], rng());
        const auto& plan = inst.partition.plan;
        const auto balance = check_balance(plan, BalanceBound{n, p, r});
        if (!balance.within_bound) ++violations;

        std::size_t total = 0;
        for (auto size : balance.sizes) total += size;
        ASSERT_EQ(total, n);
        ASSERT_FALSE(find_order_violation(std::span<const Key8>(inst.keys), inst.layout, plan, KeyLess{}));
        ASSERT_FALSE(find_rank_violation(std::span<const TaggedSample<Key8>>(inst.partition.sample),
                                         inst.partition.splitters, r * p, KeyLess{}));
        if (trial % 20 == 0) {
            for (std::size_t k = 0; k < p; ++k) {
                const auto row = classify_row(inst.layout.sequence(std::span<const Key8>(inst.keys), k), k,
                                              inst.partition.splitters);
                ASSERT_TRUE(std::equal(row.begin(), row.end(), plan.row(k).begin()));
            }
        }
    }
    EXPECT_EQ(violations, 0u);
}

TEST(Partition, BoundHoldsNearTheApplicabilityEdge) {
    // Small n with r^2 p^2 close to n, where the additive r*p term matters most.
    SplitMix64 rng(601);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t p = 2 + rng.below(12);
        const std::size_t r = 1 + rng.below(3);
        const std::size_t n = r * r * p * p + rng.below(4 * r * p * p + 1);
        SortConfig cfg;
        cfg.p = p;
        cfg.mode = Deterministic{r};
        const Distribution dist = trial % 3 == 0 ? Distribution::few_distinct : Distribution::uniform_bytes;
        const auto inst = build(n, p, cfg, dist, rng());
        const auto balance = check_balance(inst.partition.plan, BalanceBound{n, p, r});
        ASSERT_TRUE(balance.within_bound) << "n=" << n << " p=" << p << " r=" << r << " max=" << balance.max_size
                                          << " limit=" << *balance.limit;
    }
}

TEST(Partition, RandomPlansAreOrderedAndExhaustive) {
    SplitMix64 rng(602);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 20000, p = 8 << (trial % 3);
        SortConfig cfg;
        cfg.p = p;
        cfg.mode = Randomized{};
        cfg.seed = rng();
        const auto inst = build(n, p, cfg, trial % 2 ? Distribution::few_distinct : Distribution::uniform_bytes, rng());
        const auto balance = check_balance(inst.partition.plan);
        EXPECT_FALSE(balance.limit.has_value());
        std::size_t total = 0;
        for (auto size : balance.sizes) total += size;
        ASSERT_EQ(total, n);
        ASSERT_FALSE(
            find_order_violation(std::span<const Key8>(inst.keys), inst.layout, inst.partition.plan, KeyLess{}));
        std::set<std::pair<std::size_t, std::size_t>> tags;
        for (const auto& t : inst.partition.sample) tags.insert({t.seq, t.idx});
        EXPECT_EQ(tags.size(), inst.partition.sample.size());
    }
}

TEST(Partition, CorruptedPlanBreaksOrderSeparation) {
    SortConfig cfg;
    cfg.p = 8;
    cfg.mode = Deterministic{2};
    auto inst = build(4000, 8, cfg, Distribution::uniform_bytes, 5);
    auto plan = inst.partition.plan;
    // Move one key of sequence 0 from bucket 1 into bucket 0.
    ASSERT_GT(plan.piece(0, 1), 0u);
    plan.at(0, 1) += 1;
    EXPECT_TRUE(find_order_violation(std::span<const Key8>(inst.keys), inst.layout, plan, KeyLess{}).has_value());
}

} // namespace
} // namespace ovsort
