#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ovsort/errors.hpp"
#include "ovsort/rng.hpp"

namespace ovsort {

/// Fixed-width byte-string key ordered bytewise (memcmp order).
template <std::size_t L>
struct Key {
    static_assert(L >= 1, "keys need at least one byte");
    static constexpr std::size_t width = L;

    std::array<std::uint8_t, L> bytes{};

    friend bool operator==(const Key& a, const Key& b) noexcept {
        return std::memcmp(a.bytes.data(), b.bytes.data(), L) == 0;
    }
    friend std::strong_ordering operator<=>(const Key& a, const Key& b) noexcept {
        return std::memcmp(a.bytes.data(), b.bytes.data(), L) <=> 0;
    }
};

/// Bytewise `less`; the comparator every pipeline uses for keys.
struct KeyLess {
    template <std::size_t L>
    bool operator()(const Key<L>& a, const Key<L>& b) const noexcept {
        return std::memcmp(a.bytes.data(), b.bytes.data(), L) < 0;
    }
};

/// Three-way bytewise comparison of two raw keys.
inline std::strong_ordering compare(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) {
        throw UsageError("compare: key lengths differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
    if (a.empty()) {
        return std::strong_ordering::equal;
    }
    return std::memcmp(a.data(), b.data(), a.size()) <=> 0;
}

/// Dense array of n keys of L bytes each.
class KeyBuffer {
public:
    KeyBuffer() = default;

    explicit KeyBuffer(std::size_t key_length, std::size_t count = 0) : key_length_(key_length), count_(count) {
        if (key_length == 0) {
            throw UsageError("KeyBuffer: key length must be at least 1");
        }
        if (count > std::numeric_limits<std::size_t>::max() / key_length ||
            count * key_length > std::vector<std::uint8_t>().max_size()) {
            throw CapacityError("KeyBuffer: " + std::to_string(count) + " keys of " + std::to_string(key_length) +
                                " bytes exceed addressable size");
        }
        data_.resize(count * key_length);
    }

    KeyBuffer(std::size_t key_length, std::vector<std::uint8_t> bytes) : key_length_(key_length) {
        if (key_length == 0) {
            throw UsageError("KeyBuffer: key length must be at least 1");
        }
        if (bytes.size() % key_length != 0) {
            throw FormatError("KeyBuffer: " + std::to_string(bytes.size()) + " bytes is not a multiple of key length " +
                              std::to_string(key_length));
        }
        count_ = bytes.size() / key_length;
        data_ = std::move(bytes);
    }

    std::size_t size() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }
    std::size_t key_length() const noexcept { return key_length_; }

    std::span<const std::uint8_t> key(std::size_t i) const noexcept {
        return {data_.data() + i * key_length_, key_length_};
    }
    std::span<std::uint8_t> key(std::size_t i) noexcept { return {data_.data() + i * key_length_, key_length_}; }

    std::span<const std::uint8_t> bytes() const noexcept { return data_; }
    std::span<std::uint8_t> bytes() noexcept { return data_; }

    friend bool operator==(const KeyBuffer& a, const KeyBuffer& b) noexcept {
        return a.key_length_ == b.key_length_ && a.count_ == b.count_ && a.data_ == b.data_;
    }

private:
    std::size_t key_length_ = 1;
    std::size_t count_ = 0;
    std::vector<std::uint8_t> data_;
};

enum class Distribution { uniform_bytes, few_distinct, sorted, reverse_sorted, constant };

struct KeyGenSpec {
    std::size_t n = 0;
    std::size_t key_length = 32;
    Distribution distribution = Distribution::uniform_bytes;
    /// Palette size for few_distinct.
    std::size_t distinct = 4;
    std::uint64_t seed = 0;
};

inline std::string to_string(const KeyGenSpec& spec) {
    switch (spec.distribution) {
    case Distribution::uniform_bytes: return "uniform";
    case Distribution::few_distinct: return "few-distinct:" + std::to_string(spec.distinct);
    case Distribution::sorted: return "sorted";
    case Distribution::reverse_sorted: return "reverse";
    case Distribution::constant: return "constant";
    }
    return "?";
}

/// Parses "uniform", "sorted", "reverse", "constant" or "few-distinct:D" into `spec`.
inline void parse_distribution(std::string_view text, KeyGenSpec& spec) {
    if (text == "uniform" || text == "uniform-bytes") {
        spec.distribution = Distribution::uniform_bytes;
    } else if (text == "sorted") {
        spec.distribution = Distribution::sorted;
    } else if (text == "reverse" || text == "reverse-sorted") {
        spec.distribution = Distribution::reverse_sorted;
    } else if (text == "constant") {
        spec.distribution = Distribution::constant;
    } else if (text.starts_with("few-distinct")) {
        spec.distribution = Distribution::few_distinct;
        spec.distinct = 4;
        if (auto colon = text.find(':'); colon != std::string_view::npos) {
            std::size_t d = 0;
            for (char c : text.substr(colon + 1)) {
                if (c < '0' || c > '9') {
                    throw UsageError("bad distinct count in distribution '" + std::string(text) + "'");
                }
                d = d * 10 + static_cast<std::size_t>(c - '0');
            }
            if (d == 0) {
                throw UsageError("few-distinct needs at least one value");
            }
            spec.distinct = d;
        }
    } else {
        throw UsageError("unknown distribution '" + std::string(text) + "'");
    }
}

namespace detail {

inline void fill_random(std::span<std::uint8_t> out, SplitMix64& rng) {
    std::size_t i = 0;
    for (; i + 8 <= out.size(); i += 8) {
        const std::uint64_t word = rng();
        std::memcpy(out.data() + i, &word, 8);
    }
    if (i < out.size()) {
        const std::uint64_t word = rng();
        std::memcpy(out.data() + i, &word, out.size() - i);
    }
}

inline void sort_buffer(KeyBuffer& buffer, bool descending) {
    const std::size_t n = buffer.size();
    const std::size_t len = buffer.key_length();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto bytes = buffer.bytes();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const int c = std::memcmp(bytes.data() + a * len, bytes.data() + b * len, len);
        return descending ? c > 0 : c < 0;
    });
    std::vector<std::uint8_t> permuted(bytes.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(permuted.data() + i * len, bytes.data() + order[i] * len, len);
    }
    buffer = KeyBuffer(len, std::move(permuted));
}

} // namespace detail

/// Builds a benchmark input. The same spec (including seed) always yields the same bytes.
inline KeyBuffer generate(const KeyGenSpec& spec) {
    KeyBuffer buffer(spec.key_length, spec.n);
    SplitMix64 rng(spec.seed);
    const std::size_t len = spec.key_length;

    switch (spec.distribution) {
    case Distribution::uniform_bytes:
    case Distribution::sorted:
    case Distribution::reverse_sorted:
        detail::fill_random(buffer.bytes(), rng);
        break;
    case Distribution::few_distinct: {
        if (spec.distinct == 0) {
            throw UsageError("few-distinct needs at least one value");
        }
        std::vector<std::uint8_t> palette(spec.distinct * len);
        detail::fill_random(palette, rng);
        for (std::size_t i = 0; i < spec.n; ++i) {
            const auto pick = rng.below(spec.distinct);
            std::memcpy(buffer.key(i).data(), palette.data() + pick * len, len);
        }
        break;
    }
    case Distribution::constant: {
        std::vector<std::uint8_t> value(len);
        detail::fill_random(value, rng);
        for (std::size_t i = 0; i < spec.n; ++i) {
            std::memcpy(buffer.key(i).data(), value.data(), len);
        }
        break;
    }
    }

    if (spec.distribution == Distribution::sorted) {
        detail::sort_buffer(buffer, false);
    } else if (spec.distribution == Distribution::reverse_sorted) {
        detail::sort_buffer(buffer, true);
    }
    return buffer;
}

/// 64-bit hash of one key's bytes (FNV-1a followed by a SplitMix finalizer).
inline std::uint64_t hash_key(std::span<const std::uint8_t> key) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : key) {
        h = (h ^ b) * 0x100000001b3ULL;
    }
    return SplitMix64::finalize(h);
}

/// Order-independent digest of a multiset of keys. Two buffers holding the same keys in
/// any order produce equal fingerprints.
struct MultisetFingerprint {
    std::uint64_t count = 0;
    std::uint64_t sum = 0;
    std::uint64_t sum_of_squares = 0;
    std::uint64_t xor_mix = 0;

    void add(std::span<const std::uint8_t> key) noexcept {
        const std::uint64_t h = hash_key(key);
        ++count;
        sum += h;
        sum_of_squares += h * h;
        xor_mix ^= SplitMix64::finalize(h);
    }

    friend bool operator==(const MultisetFingerprint&, const MultisetFingerprint&) = default;
};

inline MultisetFingerprint fingerprint(const KeyBuffer& buffer) noexcept {
    MultisetFingerprint fp;
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        fp.add(buffer.key(i));
    }
    return fp;
}

template <std::size_t L>
MultisetFingerprint fingerprint(std::span<const Key<L>> keys) noexcept {
    MultisetFingerprint fp;
    for (const auto& k : keys) {
        fp.add(k.bytes);
    }
    return fp;
}

/// Order-sensitive checksum over the raw bytes of a buffer.
inline std::uint64_t checksum(const KeyBuffer& buffer) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ buffer.key_length();
    for (auto b : buffer.bytes()) {
        h = (h ^ b) * 0x100000001b3ULL;
    }
    return SplitMix64::finalize(h ^ buffer.size());
}

// Typed views. The pipeline is a template over Key<W>; a buffer of length L is
// carried in the smallest supported width W >= L, zero-padded. Appending the
// same zero bytes to every key preserves bytewise order and equality.

inline constexpr std::array<std::size_t, 6> kKeyWidths{8, 16, 32, 64, 128, 256};
inline constexpr std::size_t kMaxSortableKeyLength = kKeyWidths.back();

template <std::size_t W>
std::vector<Key<W>> to_keys(const KeyBuffer& buffer) {
    if (buffer.key_length() > W) {
        throw UsageError("to_keys: key length " + std::to_string(buffer.key_length()) + " exceeds width " +
                         std::to_string(W));
    }
    std::vector<Key<W>> keys(buffer.size());
    const std::size_t len = buffer.key_length();
    for (std::size_t i = 0; i < keys.size(); ++i) {
        std::memcpy(keys[i].bytes.data(), buffer.key(i).data(), len);
    }
    return keys;
}

template <std::size_t W>
KeyBuffer from_keys(std::span<const Key<W>> keys, std::size_t key_length) {
    if (key_length > W) {
        throw UsageError("from_keys: key length exceeds width");
    }
    KeyBuffer buffer(key_length, keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        std::memcpy(buffer.key(i).data(), keys[i].bytes.data(), key_length);
    }
    return buffer;
}

/// Calls `fn.template operator()<W>()` with the smallest supported width W >= key_length.
template <class Fn>
decltype(auto) with_key_width(std::size_t key_length, Fn&& fn) {
    if (key_length == 0 || key_length > kMaxSortableKeyLength) {
        throw UsageError("unsupported key length " + std::to_string(key_length) + " (1.." +
                         std::to_string(kMaxSortableKeyLength) + ")");
    }
    if (key_length <= 8) return fn.template operator()<8>();
    if (key_length <= 16) return fn.template operator()<16>();
    if (key_length <= 32) return fn.template operator()<32>();
    if (key_length <= 64) return fn.template operator()<64>();
    if (key_length <= 128) return fn.template operator()<128>();
    return fn.template operator()<256>();
}

} // namespace ovsort
