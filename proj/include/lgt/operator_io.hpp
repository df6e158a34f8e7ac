#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "lgt/operator.hpp"

namespace lgt {

// LGT1 operator files (little-endian):
//   "LGT1" | u32 version=1 | u32 K | u32 n |
//   K x ( n*n complex128 U row-major, n complex128 lambda )
// complex128 is stored as (re, im) float64 pairs.

inline constexpr std::uint32_t kOperatorFileVersion = 1;

void write_operators(std::ostream& out, const TransformChain& chain);
void write_operators(const std::filesystem::path& path, const TransformChain& chain);

/// Reads a chain. When expected_n is given, a file for a different patch
/// size is rejected with DimensionMismatch. Operators are loaded with the
/// real_valued flag cleared.
TransformChain read_operators(std::istream& in, std::optional<Index> expected_n = std::nullopt);
TransformChain read_operators(const std::filesystem::path& path,
                              std::optional<Index> expected_n = std::nullopt);

}  // namespace lgt
