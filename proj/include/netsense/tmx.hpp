#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netsense/traffic_matrix.hpp"

namespace netsense::tmx {

// TMX: the on-disk traffic-matrix container. Little-endian throughout.
//   "TMX1" | version u32 = 1 | flags u32 = 0 | reserved u32 = 0 |
//   window_index u64 (0xffff.. = aggregate) | nnz u64 |
//   nnz triples of (row u32, col u32, count u64), strictly ascending (row, col).
// File length is exactly 32 + 16 * nnz.

constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 32;
constexpr std::size_t kTripleSize = 16;

struct TmxError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagic : TmxError {
    using TmxError::TmxError;
};
struct UnsupportedVersion : TmxError {
    using TmxError::TmxError;
};
struct Malformed : TmxError {
    using TmxError::TmxError;
};

// Byte-for-byte deterministic function of the matrix.
std::vector<std::uint8_t> write_matrix(const TrafficMatrix& m);

// Inverse of write_matrix on its image; validates structure fully.
TrafficMatrix read_matrix(std::span<const std::uint8_t> bytes);

// Canonical archive member name: tm_<window index, zero-padded to 8>.tmx
std::string member_name(std::uint64_t window_index);

}  // namespace netsense::tmx
