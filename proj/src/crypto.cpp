#include "cpx/crypto.hpp"

#include "cpx/canonical.hpp"
#include "cpx/errors.hpp"

namespace cpx {

namespace {

constexpr const char* kSigLabel = "cpx:sig:v1";
constexpr const char* kOpenLabel = "cpx:pok-open:v1";
constexpr const char* kEqualLabel = "cpx:pok-equal:v1";
constexpr const char* kSaltedLabel = "cpx:salted-digest:v1";

bool scalar_in_range(const GroupParams& params, const mpz_class& x) {
  return sgn(x) >= 0 && x < params.q();
}

}  // namespace

KeyPair keygen(const GroupParams& params, SeededRng& rng) {
  KeyPair kp;
  kp.sk = params.random_nonzero_scalar(rng);
  kp.pk = params.pow(params.g(), kp.sk);
  return kp;
}

mpz_class commit(const GroupParams& params, const mpz_class& s, const mpz_class& r) {
  return params.mul(params.pow(params.g(), s), params.pow(params.h(), r));
}

mpz_class fs_challenge(const GroupParams& params, const std::string& label,
                       const std::vector<mpz_class>& statement,
                       const std::vector<mpz_class>& nonce_commitments,
                       const Bytes& context_nonce) {
  CanonicalWriter w;
  w.str(label);
  w.bytes(params.group_id());
  w.u32(static_cast<uint32_t>(statement.size()));
  for (const auto& e : statement) w.bytes(params.encode_element(e));
  w.u32(static_cast<uint32_t>(nonce_commitments.size()));
  for (const auto& e : nonce_commitments) w.bytes(params.encode_element(e));
  w.bytes(context_nonce);
  return params.hash_to_scalar(w.out());
}

SchnorrSignature sign(const GroupParams& params, const mpz_class& sk,
                      const Bytes& message, SeededRng& rng) {
  mpz_class k = params.random_scalar(rng);
  mpz_class R = params.pow(params.g(), k);
  mpz_class pk = params.pow(params.g(), sk);
  CanonicalWriter w;
  w.str(kSigLabel);
  w.bytes(params.group_id());
  w.bytes(params.encode_element(pk));
  w.bytes(params.encode_element(R));
  w.bytes(message);
  mpz_class c = params.hash_to_scalar(w.out());
  mpz_class z = params.sc_sub(k, params.sc_mul(c, sk));
  return SchnorrSignature{c, z};
}

bool verify_sig(const GroupParams& params, const mpz_class& pk,
                const Bytes& message, const SchnorrSignature& sig) {
  if (!params.is_element(pk)) return false;
  if (!scalar_in_range(params, sig.challenge) || !scalar_in_range(params, sig.response))
    return false;
  mpz_class R = params.mul(params.pow(params.g(), sig.response),
                           params.pow(pk, sig.challenge));
  CanonicalWriter w;
  w.str(kSigLabel);
  w.bytes(params.group_id());
  w.bytes(params.encode_element(pk));
  w.bytes(params.encode_element(R));
  w.bytes(message);
  return params.hash_to_scalar(w.out()) == sig.challenge;
}

KnowledgeProof prove_commitment_opening(const GroupParams& params, const mpz_class& C,
                                        const mpz_class& s, const mpz_class& r,
                                        const Bytes& context_nonce, SeededRng& rng) {
  mpz_class a = params.random_scalar(rng);
  mpz_class b = params.random_scalar(rng);
  mpz_class T = commit(params, a, b);
  mpz_class c = fs_challenge(params, kOpenLabel, {C}, {T}, context_nonce);
  KnowledgeProof proof;
  proof.commitment_nonces = {T};
  proof.challenge = c;
  proof.responses = {params.sc_add(a, params.sc_mul(c, s)),
                     params.sc_add(b, params.sc_mul(c, r))};
  return proof;
}

bool verify_opening_proof(const GroupParams& params, const mpz_class& C,
                          const KnowledgeProof& proof, const Bytes& context_nonce) {
  if (proof.commitment_nonces.size() != 1 || proof.responses.size() != 2) return false;
  const mpz_class& T = proof.commitment_nonces[0];
  if (!params.is_element(C) || !params.is_element(T)) return false;
  if (!scalar_in_range(params, proof.challenge)) return false;
  for (const auto& z : proof.responses)
    if (!scalar_in_range(params, z)) return false;
  if (fs_challenge(params, kOpenLabel, {C}, {T}, context_nonce) != proof.challenge)
    return false;
  mpz_class lhs = commit(params, proof.responses[0], proof.responses[1]);
  mpz_class rhs = params.mul(T, params.pow(C, proof.challenge));
  return lhs == rhs;
}

KnowledgeProof prove_equal_secret(const GroupParams& params,
                                  const std::vector<mpz_class>& commitments,
                                  const mpz_class& s,
                                  const std::vector<mpz_class>& blindings,
                                  const Bytes& context_nonce, SeededRng& rng) {
  if (commitments.empty())
    throw ProtocolError(ErrorCode::EmptyStatement, "no commitments to prove over");
  if (blindings.size() != commitments.size())
    throw ProtocolError(ErrorCode::ValidationError,
                        "one blinding per commitment required");
  mpz_class a = params.random_scalar(rng);
  std::vector<mpz_class> bs;
  std::vector<mpz_class> ts;
  bs.reserve(commitments.size());
  ts.reserve(commitments.size());
  for (std::size_t i = 0; i < commitments.size(); ++i) {
    bs.push_back(params.random_scalar(rng));
    ts.push_back(commit(params, a, bs.back()));
  }
  mpz_class c = fs_challenge(params, kEqualLabel, commitments, ts, context_nonce);
  KnowledgeProof proof;
  proof.commitment_nonces = ts;
  proof.challenge = c;
  proof.responses.push_back(params.sc_add(a, params.sc_mul(c, s)));
  for (std::size_t i = 0; i < commitments.size(); ++i)
    proof.responses.push_back(params.sc_add(bs[i], params.sc_mul(c, blindings[i])));
  return proof;
}

bool verify_equal_secret(const GroupParams& params,
                         const std::vector<mpz_class>& commitments,
                         const KnowledgeProof& proof, const Bytes& context_nonce) {
  if (commitments.empty())
    throw ProtocolError(ErrorCode::EmptyStatement, "no commitments to verify over");
  const std::size_t n = commitments.size();
  if (proof.commitment_nonces.size() != n || proof.responses.size() != n + 1)
    return false;
  for (const auto& C : commitments)
    if (!params.is_element(C)) return false;
  for (const auto& T : proof.commitment_nonces)
    if (!params.is_element(T)) return false;
  if (!scalar_in_range(params, proof.challenge)) return false;
  for (const auto& z : proof.responses)
    if (!scalar_in_range(params, z)) return false;
  if (fs_challenge(params, kEqualLabel, commitments, proof.commitment_nonces,
                   context_nonce) != proof.challenge)
    return false;
  const mpz_class& zs = proof.responses[0];
  for (std::size_t i = 0; i < n; ++i) {
    mpz_class lhs = commit(params, zs, proof.responses[i + 1]);
    mpz_class rhs = params.mul(proof.commitment_nonces[i],
                               params.pow(commitments[i], proof.challenge));
    if (lhs != rhs) return false;
  }
  return true;
}

SaltedDigest salted_digest(const std::string& name, const std::string& value,
                           SeededRng& rng) {
  SaltedDigest sd;
  sd.salt = rng.bytes(kSaltLen);
  sd.digest = recompute_salted_digest(sd.salt, name, value);
  return sd;
}

Hash32 recompute_salted_digest(const Bytes& salt, const std::string& name,
                               const std::string& value) {
  CanonicalWriter w;
  w.str(kSaltedLabel);
  w.bytes(salt);
  w.str(name);
  w.str(value);
  return sha256(w.out());
}

bool check_salted_digest(const SaltedDigest& sd, const std::string& name,
                         const std::string& value) {
  return sd.salt.size() == kSaltLen &&
         recompute_salted_digest(sd.salt, name, value) == sd.digest;
}

}  // namespace cpx
