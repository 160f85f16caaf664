#include "cpx/group.hpp"

#include <stdexcept>
#include <vector>

#include "cpx/canonical.hpp"
#include "cpx/errors.hpp"
#include "cpx/hash.hpp"

namespace cpx {

namespace {

// 2048-bit modulus for the production profile, derived from the SHA-256
// stream over label "cpx-group-p:v1" (first candidate k with p = 2kq + 1
// prime and exactly 2048 bits).
constexpr const char* kProdP =
    "d584d1fd30c92237dfd9ddf94641c9f583d8222b4cfd60b78dc2c991a437931a"
    "0e2e24c4274f47c5406c977ab7175fc0e5339dca8f5d833d965914dafc79b449"
    "106fbf4024c4d6482d16f82a4ab0448d7ea503a892c7d05c232e1c815360005a"
    "777ab2571dcb8298072ce56667d02cea83eb027cd4749991ed58b82e84a3926d"
    "c9e391000220c9586063f891a8dcced913f36a3e5ed130833511308f19a2f7ee"
    "bb1515c7cd23bdc88b34606864ae0d355e8554c048656f6966a45119fce2af49"
    "c17d7369cc26f9e60aba49daa914f9570b62206c97cf16f20f41a6bdb0e6de37"
    "0e9d8f5215a7090469630e39c71d945ad52102db91d7376015fc4d4e4e1fd0db";

// 256-bit subgroup order, first prime at or above the SHA-256 stream over
// label "cpx-group-q:v1".
constexpr const char* kProdQ =
    "e58b4c65da89a4d5d2c566851800eef8cac6118d3f3a2ce7ee7e927df9a0029f";

// Generator 2^cofactor mod p (the first base x with x^cofactor != 1).
constexpr const char* kProdG =
    "d443fcce7a15b469a0ebcdab1e2a04f384a06c04742c2cb1ee9d701d9d520066"
    "f9ba086e1b5231b02abae3b4ebd38dcdab6b486d5d8eb0eec92210d3c3dd9822"
    "6bd7c003dd184b8127eb2351e356d980a2e0cb3a573cedf445c2c4adad8d271a"
    "7a9604a8c113a86e5ebc4d624b98559a8f4cf6b3fdba47b0b34cfa58f0a4835f"
    "17a64d56d81705c8483aaacd35e532cd8d61bf3788d8a14ab57337a13e943790"
    "0c561389612bfeba6f9a0feea94e5eac95f87394c8acd1f3d79dee3a32af2078"
    "52b3a05cf4e9634201fa83621a1be0d2e2c165e9cb0a4ce2cf95580a628fdd9e"
    "b50fe3b13ead5db9ed171d09488a8ef6da887cce205c2f1877e543cf222f4a6c";

// Label for deriving the second Pedersen base h in every profile.
constexpr const char* kHLabel = "cpx:pedersen-h:v1";

mpz_class mpz_from_hex(const char* hex) { return mpz_class(hex, 16); }

}  // namespace

Bytes mpz_to_fixed(const mpz_class& x, std::size_t width) {
  if (sgn(x) < 0) throw std::invalid_argument("mpz_to_fixed: negative value");
  Bytes out(width, 0);
  std::size_t count = 0;
  // mpz_export writes most-significant-first words; ask for bytes.
  std::vector<uint8_t> tmp((mpz_sizeinbase(x.get_mpz_t(), 2) + 7) / 8, 0);
  if (sgn(x) != 0)
    mpz_export(tmp.data(), &count, 1, 1, 1, 0, x.get_mpz_t());
  if (count > width) throw std::invalid_argument("mpz_to_fixed: value too wide");
  std::copy(tmp.begin(), tmp.begin() + count, out.begin() + (width - count));
  return out;
}

mpz_class mpz_from_bytes(const Bytes& b) {
  mpz_class x = 0;
  if (!b.empty()) mpz_import(x.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return x;
}

GroupParams::GroupParams(std::string profile, mpz_class p, mpz_class q, mpz_class g)
    : profile_(std::move(profile)), p_(std::move(p)), q_(std::move(q)), g_(std::move(g)) {
  cofactor_ = (p_ - 1) / q_;
  p_bytes_ = (mpz_sizeinbase(p_.get_mpz_t(), 2) + 7) / 8;
  q_bytes_ = (mpz_sizeinbase(q_.get_mpz_t(), 2) + 7) / 8;
  h_ = hash_to_group(kHLabel);
  CanonicalWriter w;
  w.str("cpx:group-id:v1");
  w.str(profile_);
  w.bytes(mpz_to_fixed(p_, p_bytes_));
  w.bytes(mpz_to_fixed(q_, q_bytes_));
  w.bytes(mpz_to_fixed(g_, p_bytes_));
  w.bytes(mpz_to_fixed(h_, p_bytes_));
  group_id_ = hash_bytes(sha256(w.out()));
}

const GroupParams& GroupParams::toy() {
  static const GroupParams params("toy", 607, 101, 64);
  return params;
}

const GroupParams& GroupParams::production() {
  static const GroupParams params("production", mpz_from_hex(kProdP),
                                  mpz_from_hex(kProdQ), mpz_from_hex(kProdG));
  return params;
}

const GroupParams& GroupParams::by_name(const std::string& name) {
  if (name == "toy") return toy();
  if (name == "production") return production();
  throw ProtocolError(ErrorCode::ConfigInvalid, "unknown group profile: " + name);
}

mpz_class GroupParams::pow(const mpz_class& base, const mpz_class& exp) const {
  mpz_class r;
  mpz_class e = exp % q_;
  if (sgn(e) < 0) e += q_;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), p_.get_mpz_t());
  return r;
}

mpz_class GroupParams::mul(const mpz_class& a, const mpz_class& b) const {
  return mpz_class((a * b) % p_);
}

mpz_class GroupParams::inv(const mpz_class& a) const {
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), p_.get_mpz_t()) == 0)
    throw std::invalid_argument("inv: not invertible");
  return r;
}

bool GroupParams::is_element(const mpz_class& x) const {
  if (sgn(x) <= 0 || x >= p_) return false;
  mpz_class r;
  mpz_powm(r.get_mpz_t(), x.get_mpz_t(), q_.get_mpz_t(), p_.get_mpz_t());
  return r == 1;
}

mpz_class GroupParams::sc_add(const mpz_class& a, const mpz_class& b) const {
  return sc_mod(a + b);
}

mpz_class GroupParams::sc_sub(const mpz_class& a, const mpz_class& b) const {
  return sc_mod(a - b);
}

mpz_class GroupParams::sc_mul(const mpz_class& a, const mpz_class& b) const {
  return sc_mod(a * b);
}

mpz_class GroupParams::sc_mod(const mpz_class& a) const {
  mpz_class r = a % q_;
  if (sgn(r) < 0) r += q_;
  return r;
}

Bytes GroupParams::encode_element(const mpz_class& x) const {
  return mpz_to_fixed(x, p_bytes_);
}

mpz_class GroupParams::decode_element(const Bytes& b) const {
  if (b.size() != p_bytes_)
    throw ProtocolError(ErrorCode::ValidationError, "group element has wrong width");
  mpz_class x = mpz_from_bytes(b);
  if (!is_element(x))
    throw ProtocolError(ErrorCode::ValidationError, "value is not a group element");
  return x;
}

Bytes GroupParams::encode_scalar(const mpz_class& x) const {
  return mpz_to_fixed(sc_mod(x), q_bytes_);
}

mpz_class GroupParams::decode_scalar(const Bytes& b) const {
  if (b.size() != q_bytes_)
    throw ProtocolError(ErrorCode::ValidationError, "scalar has wrong width");
  mpz_class x = mpz_from_bytes(b);
  if (x >= q_)
    throw ProtocolError(ErrorCode::ValidationError, "scalar out of range");
  return x;
}

mpz_class GroupParams::hash_to_group(const std::string& label) const {
  for (uint32_t ctr = 0;; ++ctr) {
    CanonicalWriter w;
    w.str(label);
    w.u32(ctr);
    Hash32 d = sha256(w.out());
    mpz_class x = mpz_from_bytes(Bytes(d.begin(), d.end()));
    x %= p_;
    if (sgn(x) == 0) continue;
    mpz_class cand;
    mpz_powm(cand.get_mpz_t(), x.get_mpz_t(), cofactor_.get_mpz_t(), p_.get_mpz_t());
    if (cand == 1 || cand == g_) continue;
    return cand;
  }
}

mpz_class GroupParams::random_scalar(SeededRng& rng) const { return rng.below(q_); }

mpz_class GroupParams::random_nonzero_scalar(SeededRng& rng) const {
  for (;;) {
    mpz_class s = rng.below(q_);
    if (sgn(s) != 0) return s;
  }
}

mpz_class GroupParams::hash_to_scalar(const Bytes& data) const {
  Hash32 d = sha256(data);
  mpz_class x = mpz_from_bytes(Bytes(d.begin(), d.end()));
  return sc_mod(x);
}

}  // namespace cpx
