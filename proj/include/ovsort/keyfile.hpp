#pragma once

// Binary key files: a 16-byte little-endian header followed by n*L raw key bytes.
//
//   offset 0   char[4]  magic "OVSK"
//   offset 4   u16      format version (1)
//   offset 6   u16      key length L (>= 1)
//   offset 8   u64      key count n

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ovsort/errors.hpp"
#include "ovsort/keys.hpp"

namespace ovsort {

inline constexpr std::array<char, 4> kKeyFileMagic{'O', 'V', 'S', 'K'};
inline constexpr std::uint16_t kKeyFileVersion = 1;
inline constexpr std::size_t kKeyFileHeaderSize = 16;

namespace detail {

template <class U>
void put_le(std::uint8_t* out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out[i] = static_cast<std::uint8_t>(value >> (8 * i));
    }
}

template <class U>
U get_le(const std::uint8_t* in) {
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        value |= static_cast<U>(in[i]) << (8 * i);
    }
    return value;
}

} // namespace detail

inline std::array<std::uint8_t, kKeyFileHeaderSize> encode_keyfile_header(std::size_t key_length, std::size_t count) {
    if (key_length == 0 || key_length > 0xffff) {
        throw UsageError("key file: key length " + std::to_string(key_length) + " not representable");
    }
    std::array<std::uint8_t, kKeyFileHeaderSize> header{};
    std::memcpy(header.data(), kKeyFileMagic.data(), 4);
    detail::put_le<std::uint16_t>(header.data() + 4, kKeyFileVersion);
    detail::put_le<std::uint16_t>(header.data() + 6, static_cast<std::uint16_t>(key_length));
    detail::put_le<std::uint64_t>(header.data() + 8, static_cast<std::uint64_t>(count));
    return header;
}

inline void write_keyfile(const KeyBuffer& buffer, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    const auto header = encode_keyfile_header(buffer.key_length(), buffer.size());
    out.write(reinterpret_cast<const char*>(header.data()), header.size());
    const auto bytes = buffer.bytes();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}

inline KeyBuffer read_keyfile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    const auto file_size = std::filesystem::file_size(path);
    if (file_size < kKeyFileHeaderSize) {
        throw FormatError("key file '" + path.string() + "' truncated: missing header");
    }

    std::array<std::uint8_t, kKeyFileHeaderSize> header{};
    in.read(reinterpret_cast<char*>(header.data()), header.size());
    if (std::memcmp(header.data(), kKeyFileMagic.data(), 4) != 0) {
        throw FormatError("key file '" + path.string() + "': bad magic");
    }
    const auto version = detail::get_le<std::uint16_t>(header.data() + 4);
    if (version != kKeyFileVersion) {
        throw FormatError("key file '" + path.string() + "': unsupported version " + std::to_string(version));
    }
    const std::size_t key_length = detail::get_le<std::uint16_t>(header.data() + 6);
    const auto count = detail::get_le<std::uint64_t>(header.data() + 8);
    if (key_length == 0) {
        throw FormatError("key file '" + path.string() + "': zero key length");
    }

    const auto payload = file_size - kKeyFileHeaderSize;
    if (payload % key_length != 0) {
        throw FormatError("key file '" + path.string() + "': payload of " + std::to_string(payload) +
                          " bytes is not a multiple of key length " + std::to_string(key_length));
    }
    if (payload / key_length != count) {
        throw FormatError("key file '" + path.string() + "': header declares " + std::to_string(count) +
                          " keys but payload holds " + std::to_string(payload / key_length));
    }

    std::vector<std::uint8_t> bytes(payload);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(payload));
    if (static_cast<std::uint64_t>(in.gcount()) != payload) {
        throw FormatError("key file '" + path.string() + "' truncated");
    }
    return KeyBuffer(key_length, std::move(bytes));
}

} // namespace ovsort
