#include "cpx/rng.hpp"

#include <stdexcept>

namespace cpx {

SeededRng SeededRng::system() {
  std::random_device rd;
  std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return SeededRng(seed);
}

Bytes SeededRng::bytes(std::size_t n) {
  Bytes out(n);
  std::size_t i = 0;
  while (i < n) {
    std::uint64_t v = engine_();
    for (int j = 0; j < 8 && i < n; ++j, ++i) {
      out[i] = static_cast<std::uint8_t>((v >> (8 * j)) & 0xff);
    }
  }
  return out;
}

mpz_class SeededRng::below(const mpz_class& bound) {
  if (bound <= 0) throw std::invalid_argument("rng bound must be positive");
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const std::size_t nbytes = (bits + 7) / 8;
  const unsigned top_excess = static_cast<unsigned>(nbytes * 8 - bits);
  while (true) {
    Bytes raw = bytes(nbytes);
    raw[0] &= static_cast<std::uint8_t>(0xff >> top_excess);
    mpz_class v;
    mpz_import(v.get_mpz_t(), raw.size(), 1, 1, 1, 0, raw.data());
    if (v < bound) return v;
  }
}

}  // namespace cpx
