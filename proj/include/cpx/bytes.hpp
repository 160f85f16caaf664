#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cpx {

using Bytes = std::vector<std::uint8_t>;

Bytes to_bytes(const std::string& s);
std::string to_string(const Bytes& b);

std::string hex_encode(const Bytes& b);
Bytes hex_decode(const std::string& s);  // throws std::invalid_argument on bad input

std::string base64_encode(const Bytes& b);
Bytes base64_decode(const std::string& s);  // throws std::invalid_argument on bad input

/// RFC 4648 base32, lowercase, unpadded. Used for DID method-specific ids.
std::string base32_encode(const Bytes& b);

}  // namespace cpx
