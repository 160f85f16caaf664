#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>

#include "cpx/bytes.hpp"
#include "cpx/rng.hpp"

namespace cpx {

/// A prime-order subgroup of Z_p^* used for commitments, signatures and
/// zero-knowledge proofs.  Two profiles ship with the library:
///
///  - "toy":        p = 607, q = 101, g = 64.  Small enough that discrete
///                  logs can be brute-forced, which the test-suite oracles
///                  rely on.  Never use outside tests.
///  - "production": 2048-bit p, 256-bit q.  The constants are derived
///                  deterministically from SHA-256 streams over fixed labels
///                  so that nobody could have planted a trapdoor; the
///                  derivation is reproducible from the labels alone.
///
/// Both profiles carry a second base h with unknown log_g(h), derived by
/// hashing to the group, which makes Pedersen commitments binding.
class GroupParams {
 public:
  static const GroupParams& toy();
  static const GroupParams& production();
  /// Look up a profile by name ("toy" | "production"); throws on anything else.
  static const GroupParams& by_name(const std::string& name);

  const std::string& profile() const { return profile_; }
  const mpz_class& p() const { return p_; }
  const mpz_class& q() const { return q_; }
  const mpz_class& g() const { return g_; }
  const mpz_class& h() const { return h_; }
  const mpz_class& cofactor() const { return cofactor_; }
  std::size_t element_width() const { return p_bytes_; }
  std::size_t scalar_width() const { return q_bytes_; }
  /// Digest binding profile name and all constants; mixed into every
  /// Fiat-Shamir transcript so proofs cannot migrate between groups.
  const Bytes& group_id() const { return group_id_; }

  // --- element arithmetic (mod p) ---
  mpz_class pow(const mpz_class& base, const mpz_class& exp) const;
  mpz_class mul(const mpz_class& a, const mpz_class& b) const;
  mpz_class inv(const mpz_class& a) const;
  /// True iff x is in the prime-order subgroup (1 <= x < p, x^q == 1).
  bool is_element(const mpz_class& x) const;

  // --- scalar arithmetic (mod q) ---
  mpz_class sc_add(const mpz_class& a, const mpz_class& b) const;
  mpz_class sc_sub(const mpz_class& a, const mpz_class& b) const;
  mpz_class sc_mul(const mpz_class& a, const mpz_class& b) const;
  mpz_class sc_mod(const mpz_class& a) const;

  // --- codec: fixed-width big-endian ---
  Bytes encode_element(const mpz_class& x) const;
  mpz_class decode_element(const Bytes& b) const;
  Bytes encode_scalar(const mpz_class& x) const;
  mpz_class decode_scalar(const Bytes& b) const;

  /// Map a label onto a subgroup element with unknown discrete log:
  /// iterate x = SHA-256(label || counter) mod p, candidate = x^((p-1)/q),
  /// and take the first candidate that is neither 1 nor g.
  mpz_class hash_to_group(const std::string& label) const;

  /// Uniform scalar in [0, q) via rejection sampling.
  mpz_class random_scalar(SeededRng& rng) const;
  /// Nonzero uniform scalar in [1, q).
  mpz_class random_nonzero_scalar(SeededRng& rng) const;
  /// SHA-256(data) reduced mod q; the Fiat-Shamir challenge map.
  mpz_class hash_to_scalar(const Bytes& data) const;

 private:
  GroupParams(std::string profile, mpz_class p, mpz_class q, mpz_class g);

  std::string profile_;
  mpz_class p_, q_, g_, h_, cofactor_;
  std::size_t p_bytes_ = 0;
  std::size_t q_bytes_ = 0;
  Bytes group_id_;
};

/// Fixed-width big-endian rendering of a non-negative integer.  Throws if the
/// value does not fit.
Bytes mpz_to_fixed(const mpz_class& x, std::size_t width);
/// Big-endian bytes -> integer.
mpz_class mpz_from_bytes(const Bytes& b);

}  // namespace cpx
