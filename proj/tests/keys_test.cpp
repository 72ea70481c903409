#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_set>

#include <unistd.h>

#include "ovsort/keyfile.hpp"
#include "ovsort/keys.hpp"
#include "test_support.hpp"

namespace ovsort {
namespace {

// Per-byte scan, written independently of memcmp.
int byte_scan_compare(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            return a[i] < b[i] ? -1 : 1;
        }
    }
    return 0;
}

int sign(std::strong_ordering o) { return o < 0 ? -1 : (o > 0 ? 1 : 0); }

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ovsort_" + name + "_" + std::to_string(::getpid()));
}

TEST(Compare, LastByteDecides) {
    std::vector<std::uint8_t> a(32, 0), b(32, 0);
    a[31] = 1;
    b[31] = 2;
    EXPECT_EQ(compare(a, b), std::strong_ordering::less);
    EXPECT_EQ(compare(b, a), std::strong_ordering::greater);
}

TEST(Compare, Reflexive) {
    const auto buf = generate({1, 32, Distribution::uniform_bytes, 4, 7});
    EXPECT_EQ(compare(buf.key(0), buf.key(0)), std::strong_ordering::equal);
}

TEST(Compare, LengthMismatchIsUsageError) {
    std::vector<std::uint8_t> a(4), b(5);
    EXPECT_THROW((void)compare(a, b), UsageError);
}

TEST(Compare, AgreesWithByteScanOracle) {
    // Bytes from {0, 1} so that long common prefixes are frequent.
    SplitMix64 rng(11);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<std::uint8_t> a(32), b(32);
        for (std::size_t i = 0; i < 32; ++i) {
            a[i] = static_cast<std::uint8_t>(rng.below(2));
            b[i] = i < 24 ? a[i] : static_cast<std::uint8_t>(rng.below(2));
        }
        ASSERT_EQ(sign(compare(a, b)), byte_scan_compare(a, b));
    }
}

TEST(Compare, TotalPreorderOnRandomTriples) {
    SplitMix64 rng(12);
    for (int trial = 0; trial < 10000; ++trial) {
        std::array<std::array<std::uint8_t, 3>, 3> k{};
        for (auto& key : k)
            for (auto& b : key) b = static_cast<std::uint8_t>(rng.below(3));
        const int ab = sign(compare(k[0], k[1]));
        const int ba = sign(compare(k[1], k[0]));
        const int bc = sign(compare(k[1], k[2]));
        const int ac = sign(compare(k[0], k[2]));
        ASSERT_EQ(ab, -ba);
        if (ab <= 0 && bc <= 0) {
            ASSERT_LE(ac, 0);
        }
        if (ab == 0 && bc == 0) {
            ASSERT_EQ(ac, 0);
        }
    }
}

TEST(Generate, EmptyBuffer) {
    const auto buf = generate({0, 32, Distribution::uniform_bytes, 4, 1});
    EXPECT_TRUE(buf.empty());
    EXPECT_EQ(buf.bytes().size(), 0u);
}

TEST(Generate, DeterministicInSeed) {
    const KeyGenSpec spec{1024000, 32, Distribution::uniform_bytes, 4, 1};
    const auto a = generate(spec);
    const auto b = generate(spec);
    EXPECT_EQ(a.size(), 1024000u);
    EXPECT_TRUE(a == b);
    auto other = spec;
    other.seed = 2;
    EXPECT_FALSE(a == generate(other));
}

TEST(Generate, FewDistinctHasAtMostDValues) {
    const auto buf = generate({100000, 32, Distribution::few_distinct, 4, 3});
    std::unordered_set<std::uint64_t> seen;
    std::set<std::vector<std::uint8_t>> exact;
    for (std::size_t i = 0; i < buf.size(); ++i) {
        seen.insert(hash_key(buf.key(i)));
        exact.emplace(buf.key(i).begin(), buf.key(i).end());
    }
    EXPECT_LE(seen.size(), 4u);
    EXPECT_EQ(exact.size(), seen.size());
}

TEST(Generate, OrderedDistributions) {
    const auto sorted = generate({5000, 16, Distribution::sorted, 4, 5});
    const auto reversed = generate({5000, 16, Distribution::reverse_sorted, 4, 5});
    const auto constant = generate({5000, 16, Distribution::constant, 4, 5});
    for (std::size_t i = 1; i < 5000; ++i) {
        ASSERT_LE(sign(compare(sorted.key(i - 1), sorted.key(i))), 0);
        ASSERT_GE(sign(compare(reversed.key(i - 1), reversed.key(i))), 0);
        ASSERT_EQ(sign(compare(constant.key(0), constant.key(i))), 0);
    }
    EXPECT_EQ(fingerprint(sorted), fingerprint(reversed));
}

TEST(Generate, UniformBytesCoverAllValues) {
    const auto buf = generate({10000, 32, Distribution::uniform_bytes, 4, 9});
    std::array<std::size_t, 256> counts{};
    for (auto b : buf.bytes()) ++counts[b];
    // 320000 bytes over 256 bins: chi-square with 255 dof, 99.9th percentile ~ 330.
    const double expected = 320000.0 / 256.0;
    double chi2 = 0;
    for (auto c : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, 330.0);
}

TEST(KeyBuffer, CapacityOverflow) {
    EXPECT_THROW(KeyBuffer(32, std::numeric_limits<std::size_t>::max() / 16), CapacityError);
    EXPECT_THROW(generate({std::numeric_limits<std::size_t>::max() / 8, 32, Distribution::uniform_bytes, 4, 0}),
                 CapacityError);
    EXPECT_THROW(KeyBuffer(0), UsageError);
}

TEST(KeyFile, ThreeKeyRoundTrip) {
    KeyBuffer buf(5, 3);
    for (std::size_t i = 0; i < buf.bytes().size(); ++i) buf.bytes()[i] = static_cast<std::uint8_t>(i * 7);
    const auto path = temp_file("three");
    write_keyfile(buf, path);
    EXPECT_EQ(std::filesystem::file_size(path), 16u + 15u);
    EXPECT_TRUE(read_keyfile(path) == buf);
    std::filesystem::remove(path);
}

TEST(KeyFile, HeaderLayoutIsLittleEndian) {
    const auto header = encode_keyfile_header(32, 0x0102030405060708ULL);
    EXPECT_EQ(std::string(header.begin(), header.begin() + 4), "OVSK");
    EXPECT_EQ(header[4], 1);
    EXPECT_EQ(header[5], 0);
    EXPECT_EQ(header[6], 32);
    EXPECT_EQ(header[7], 0);
    EXPECT_EQ(header[8], 0x08);
    EXPECT_EQ(header[15], 0x01);
}

void write_raw(const std::filesystem::path& path, std::span<const std::uint8_t> header, std::size_t payload) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    std::vector<char> body(payload, 'x');
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
}

TEST(KeyFile, SizeNotDivisibleByKeyLength) {
    const auto path = temp_file("ragged");
    write_raw(path, encode_keyfile_header(4, 2), 9);
    EXPECT_THROW(read_keyfile(path), FormatError);
    std::filesystem::remove(path);
}

TEST(KeyFile, TruncatedPayload) {
    const auto path = temp_file("short");
    write_raw(path, encode_keyfile_header(4, 3), 8);
    EXPECT_THROW(read_keyfile(path), FormatError);
    const auto header = encode_keyfile_header(4, 3);
    write_raw(path, std::span<const std::uint8_t>(header).first(10), 0);
    EXPECT_THROW(read_keyfile(path), FormatError);
    std::filesystem::remove(path);
}

TEST(KeyFile, BadMagicAndZeroLength) {
    const auto path = temp_file("magic");
    auto header = encode_keyfile_header(4, 1);
    header[0] = 'X';
    write_raw(path, header, 4);
    EXPECT_THROW(read_keyfile(path), FormatError);

    header = encode_keyfile_header(4, 0);
    header[6] = 0;
    write_raw(path, header, 0);
    EXPECT_THROW(read_keyfile(path), FormatError);
    std::filesystem::remove(path);
}

TEST(KeyFile, MillionKeyRoundTripChecksum) {
    const auto buf = generate({1000000, 32, Distribution::uniform_bytes, 4, 21});
    const auto path = temp_file("million");
    write_keyfile(buf, path);
    const auto back = read_keyfile(path);
    EXPECT_EQ(checksum(back), checksum(buf));
    EXPECT_EQ(back.size(), buf.size());
    std::filesystem::remove(path);
}

TEST(KeyWidth, PaddingPreservesOrder) {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t len = 1 + rng.below(40);
        auto buf = generate({500, len, Distribution::few_distinct, 1 + rng.below(50), rng()});
        auto expected = buf;
        detail::sort_buffer(expected, false);
        const auto sorted = with_key_width(len, [&]<std::size_t W>() {
            auto keys = to_keys<W>(buf);
            std::sort(keys.begin(), keys.end(), KeyLess{});
            return from_keys<W>(std::span<const Key<W>>(keys), len);
        });
        ASSERT_TRUE(sorted == expected) << "len " << len;
    }
    EXPECT_THROW(with_key_width(0, []<std::size_t W>() { return W; }), UsageError);
    EXPECT_THROW(with_key_width(257, []<std::size_t W>() { return W; }), UsageError);
}

TEST(Distribution, Parse) {
    KeyGenSpec spec;
    parse_distribution("few-distinct:12", spec);
    EXPECT_EQ(spec.distribution, Distribution::few_distinct);
    EXPECT_EQ(spec.distinct, 12u);
    EXPECT_EQ(to_string(spec), "few-distinct:12");
    parse_distribution("reverse", spec);
    EXPECT_EQ(spec.distribution, Distribution::reverse_sorted);
    EXPECT_THROW(parse_distribution("zipf", spec), UsageError);
    EXPECT_THROW(parse_distribution("few-distinct:0", spec), UsageError);
}

} // namespace
} // namespace ovsort
