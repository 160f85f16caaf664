#pragma once

#include <string>
#include <vector>

#include "cpx/bytes.hpp"
#include "cpx/group.hpp"
#include "cpx/hash.hpp"
#include "cpx/rng.hpp"

namespace cpx {

/// Discrete-log keypair over a GroupParams profile: pk = g^sk.
struct KeyPair {
  mpz_class sk;  // private scalar, never serialized into any public message
  mpz_class pk;  // public group element
};

KeyPair keygen(const GroupParams& params, SeededRng& rng);

/// Pedersen commitment C = g^s * h^r: perfectly hiding in r, binding while
/// log_g(h) stays unknown.
mpz_class commit(const GroupParams& params, const mpz_class& s, const mpz_class& r);

/// Schnorr signature in challenge/response form.  verify_sig recomputes the
/// nonce commitment as g^response * pk^challenge and checks that hashing it
/// with the message reproduces the challenge.
struct SchnorrSignature {
  mpz_class challenge;
  mpz_class response;
};

SchnorrSignature sign(const GroupParams& params, const mpz_class& sk,
                      const Bytes& message, SeededRng& rng);
/// Never throws: malformed or out-of-range inputs simply verify false.
bool verify_sig(const GroupParams& params, const mpz_class& pk,
                const Bytes& message, const SchnorrSignature& sig);

/// Non-interactive sigma-protocol transcript.  The challenge is the digest of
/// (context label, group id, statement, nonce commitments, context nonce), so
/// a proof binds to exactly one statement and verifier-supplied nonce.
struct KnowledgeProof {
  std::vector<mpz_class> commitment_nonces;
  mpz_class challenge;
  std::vector<mpz_class> responses;
};

/// Prove knowledge of an opening (s, r) of C = g^s * h^r.
KnowledgeProof prove_commitment_opening(const GroupParams& params, const mpz_class& C,
                                        const mpz_class& s, const mpz_class& r,
                                        const Bytes& context_nonce, SeededRng& rng);
bool verify_opening_proof(const GroupParams& params, const mpz_class& C,
                          const KnowledgeProof& proof, const Bytes& context_nonce);

/// Prove that one secret s opens every commitment C_i = g^s * h^{r_i}.
/// The response for s is shared across all commitments, which is what makes
/// the equality claim sound.  Throws EmptyStatement when commitments is empty.
KnowledgeProof prove_equal_secret(const GroupParams& params,
                                  const std::vector<mpz_class>& commitments,
                                  const mpz_class& s,
                                  const std::vector<mpz_class>& blindings,
                                  const Bytes& context_nonce, SeededRng& rng);
bool verify_equal_secret(const GroupParams& params,
                         const std::vector<mpz_class>& commitments,
                         const KnowledgeProof& proof, const Bytes& context_nonce);

/// Hash commitment to one named attribute value: digest of
/// (salt, name, value) under the canonical encoding, salt 16 uniform bytes.
struct SaltedDigest {
  Bytes salt;
  Hash32 digest;
};

constexpr std::size_t kSaltLen = 16;

SaltedDigest salted_digest(const std::string& name, const std::string& value,
                           SeededRng& rng);
Hash32 recompute_salted_digest(const Bytes& salt, const std::string& name,
                               const std::string& value);
bool check_salted_digest(const SaltedDigest& sd, const std::string& name,
                         const std::string& value);

/// Fiat-Shamir challenge over a labelled transcript.  Exposed so the test
/// oracles can re-derive challenges independently of the provers.
mpz_class fs_challenge(const GroupParams& params, const std::string& label,
                       const std::vector<mpz_class>& statement,
                       const std::vector<mpz_class>& nonce_commitments,
                       const Bytes& context_nonce);

}  // namespace cpx
