#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "cpx/bytes.hpp"

namespace cpx {

/// Deterministic byte encoding used for every signed or digested structure:
/// integers fixed-width big-endian, byte arrays length-prefixed with a
/// 4-byte big-endian length, map keys sorted bytewise.
class CanonicalWriter {
 public:
  CanonicalWriter& u8(std::uint8_t v);
  CanonicalWriter& u32(std::uint32_t v);
  CanonicalWriter& u64(std::uint64_t v);
  CanonicalWriter& i64(std::int64_t v);

  /// 4-byte big-endian length followed by the raw bytes.
  CanonicalWriter& bytes(const Bytes& b);
  CanonicalWriter& str(const std::string& s);

  /// Raw bytes without a length prefix (fixed-width fields only).
  CanonicalWriter& raw(const Bytes& b);
  CanonicalWriter& raw(const std::uint8_t* data, std::size_t len);

  /// Entry count, then key/value pairs in bytewise key order.
  CanonicalWriter& string_map(const std::map<std::string, std::string>& m);

  const Bytes& out() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

}  // namespace cpx
