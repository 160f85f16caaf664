#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>

#include "cpx/bytes.hpp"

namespace cpx {

/// Deterministic random source. Every piece of randomness in the stack —
/// keys, blindings, salts, nonces, identifiers — is drawn from one of
/// these, so a seeded run replays byte-for-byte.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  /// Nondeterministically seeded instance for ad-hoc use.
  static SeededRng system();

  std::uint64_t next_u64() { return engine_(); }

  Bytes bytes(std::size_t n);

  /// Uniform integer in [0, bound) by rejection sampling.
  mpz_class below(const mpz_class& bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cpx
