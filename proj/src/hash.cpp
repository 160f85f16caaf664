#include "cpx/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace cpx {

Hash32 sha256(const std::uint8_t* data, std::size_t len) {
  Hash32 out{};
  unsigned int out_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr ||
      EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data, len) != 1 ||
      EVP_DigestFinal_ex(ctx, out.data(), &out_len) != 1 || out_len != 32) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  return out;
}

Hash32 sha256(const Bytes& data) { return sha256(data.data(), data.size()); }

Bytes hash_bytes(const Hash32& h) { return Bytes(h.begin(), h.end()); }

Hash32 hash_from_bytes(const Bytes& b) {
  if (b.size() != 32) throw std::invalid_argument("expected 32-byte digest");
  Hash32 out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

}  // namespace cpx
