#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace ovsort {

/// SplitMix64 (Steele, Lea, Flood 2014). Constants are the published ones so
/// other implementations can reproduce a stream from the same seed.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return finalize(state_);
    }

    /// Uniform draw on [0, bound). bound must be nonzero.
    /// Lemire's multiply-shift with rejection, so the result is unbiased.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        auto product = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

    /// Independent child stream.
    constexpr SplitMix64 split() noexcept { return SplitMix64((*this)()); }

    static constexpr std::uint64_t finalize(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Order-sensitive hash of a list of integers; used to derive per-cell seeds.
constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto v : parts) {
        h = SplitMix64::finalize(h ^ SplitMix64::finalize(v + 0x9e3779b97f4a7c15ULL));
    }
    return h;
}

} // namespace ovsort
