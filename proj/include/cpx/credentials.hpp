#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpx/crypto.hpp"
#include "cpx/jsonio.hpp"
#include "cpx/registry.hpp"
#include "cpx/rng.hpp"

namespace cpx {

/// The holder's wallet-wide secret.  Only commitments to it and proofs about
/// it ever leave the wallet; the scalar itself is never serialized into any
/// outbound message.
struct LinkSecret {
  mpz_class s;
  static LinkSecret generate(const GroupParams& params, SeededRng& rng);
};

/// Issuer -> holder: what would be attested, for approval before issuance.
struct CredentialOffer {
  std::string schema_id;
  std::map<std::string, std::string> attribute_preview;
  Did issuer_did;
  Bytes offer_nonce;  // 16 fresh bytes; binds the holder's request proof
};

/// Holder -> issuer: blind contribution of the link secret.  The opening
/// proof is bound to the offer nonce so a request cannot be replayed
/// against a different offer.
struct CredentialRequest {
  mpz_class link_commitment;
  KnowledgeProof opening_proof;
};

/// The signed, attribute-blinded core of a credential: salted digests in
/// schema order plus the holder's link commitment.  Carries no plaintext.
struct CredentialBody {
  std::string credential_id;  // 16 random bytes, hex
  std::string schema_id;
  Did issuer_did;
  std::string issued_at;  // ISO-8601 UTC
  std::vector<Hash32> digests;
  mpz_class link_commitment;
};

/// What the holder stores: body and signature plus the plaintext values and
/// salts needed to open individual digests during selective disclosure.
struct IssuedCredential {
  CredentialBody body;
  std::map<std::string, std::string> values;
  std::map<std::string, Bytes> salts;
  SchnorrSignature signature;
};

Bytes credential_body_signing_bytes(const GroupParams& params,
                                    const CredentialBody& body);

Json offer_to_json(const CredentialOffer& offer);
CredentialOffer offer_from_json(const Json& j);
Json request_to_json(const GroupParams& params, const CredentialRequest& req);
CredentialRequest request_from_json(const GroupParams& params, const Json& j);
Json body_to_json(const GroupParams& params, const CredentialBody& body);
CredentialBody body_from_json(const GroupParams& params, const Json& j);
Json issued_to_json(const GroupParams& params, const IssuedCredential& cred);
IssuedCredential issued_from_json(const GroupParams& params, const Json& j);

/// Build an offer, validating the schema exists and that the preview covers
/// its attributes exactly.  Throws UnknownSchema / MissingAttribute /
/// ValidationError.
CredentialOffer make_offer(const Registry& registry, const Did& issuer_did,
                           const std::string& schema_id,
                           const std::map<std::string, std::string>& values,
                           SeededRng& rng);

/// Holder side: commit to the link secret under a fresh blinding and prove
/// the opening, bound to the offer nonce.  The blinding is returned through
/// blinding_out so the wallet can later prove statements about the
/// commitment.
CredentialRequest make_request(const GroupParams& params, const LinkSecret& secret,
                               const CredentialOffer& offer, SeededRng& rng,
                               mpz_class* blinding_out);

/// Issuer side: check the request proof against this offer's nonce, then
/// salt, digest and sign.  Throws ProofBindingMismatch when the proof is
/// internally consistent but bound to a different nonce, BadRequestProof
/// when it fails outright.
IssuedCredential issue_credential(const GroupParams& params, const Registry& registry,
                                  const Did& issuer_did, const mpz_class& issuer_sk,
                                  const CredentialOffer& offer,
                                  const CredentialRequest& request,
                                  const std::string& issued_at_iso, SeededRng& rng);

/// Holder-side acceptance check.  Returns std::nullopt when the credential
/// should be accepted, otherwise the machine-readable refusal reason:
/// "SchemaMismatch", "UnknownIssuer", "BadIssuerSignature",
/// "ForeignCommitment", "DigestMismatch" or "ValueMismatch".
std::optional<std::string> check_issued_credential(
    const GroupParams& params, const Registry& registry, const IssuedCredential& cred,
    const CredentialOffer& approved_offer, const mpz_class& expected_commitment);

}  // namespace cpx
