#include "cpx/canonical.hpp"

namespace cpx {

CanonicalWriter& CanonicalWriter::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}

CanonicalWriter& CanonicalWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    buf_.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
  return *this;
}

CanonicalWriter& CanonicalWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    buf_.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
  return *this;
}

CanonicalWriter& CanonicalWriter::i64(std::int64_t v) {
  return u64(static_cast<std::uint64_t>(v));
}

CanonicalWriter& CanonicalWriter::bytes(const Bytes& b) {
  u32(static_cast<std::uint32_t>(b.size()));
  buf_.insert(buf_.end(), b.begin(), b.end());
  return *this;
}

CanonicalWriter& CanonicalWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
  return *this;
}

CanonicalWriter& CanonicalWriter::raw(const Bytes& b) {
  buf_.insert(buf_.end(), b.begin(), b.end());
  return *this;
}

CanonicalWriter& CanonicalWriter::raw(const std::uint8_t* data, std::size_t len) {
  buf_.insert(buf_.end(), data, data + len);
  return *this;
}

CanonicalWriter& CanonicalWriter::string_map(
    const std::map<std::string, std::string>& m) {
  u32(static_cast<std::uint32_t>(m.size()));
  for (const auto& [k, v] : m) {  // std::map iterates in sorted key order
    str(k);
    str(v);
  }
  return *this;
}

}  // namespace cpx
