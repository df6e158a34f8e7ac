#pragma once

// Little-endian primitives shared by the LGT1 and LGP1 readers/writers.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "lgt/types.hpp"

namespace lgt::detail {

template <typename T>
T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::array<unsigned char, sizeof(T)> bytes;
        std::memcpy(bytes.data(), &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&v, bytes.data(), sizeof(T));
    }
    return v;
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
    v = byteswap_if_big(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    bits = byteswap_if_big(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

inline std::uint32_t read_u32(std::istream& in, const char* what) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw FormatError(std::string("truncated file while reading ") + what);
    }
    return byteswap_if_big(v);
}

inline double read_f64(std::istream& in, const char* what) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw FormatError(std::string("truncated file while reading ") + what);
    }
    return std::bit_cast<double>(byteswap_if_big(bits));
}

inline void expect_magic(std::istream& in, const char (&magic)[5]) {
    char got[4] = {};
    if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
        throw FormatError(std::string("bad magic, expected ") + magic);
    }
}

}  // namespace lgt::detail
