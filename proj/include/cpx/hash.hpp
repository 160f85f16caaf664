#pragma once

#include <array>

#include "cpx/bytes.hpp"

namespace cpx {

/// The single fixed 256-bit digest used throughout the protocol stack.
using Hash32 = std::array<std::uint8_t, 32>;

Hash32 sha256(const Bytes& data);
Hash32 sha256(const std::uint8_t* data, std::size_t len);

Bytes hash_bytes(const Hash32& h);
Hash32 hash_from_bytes(const Bytes& b);  // throws std::invalid_argument unless 32 bytes

inline Hash32 zero_hash() { return Hash32{}; }

}  // namespace cpx
