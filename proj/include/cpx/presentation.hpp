#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cpx/credentials.hpp"
#include "cpx/crypto.hpp"
#include "cpx/jsonio.hpp"
#include "cpx/registry.hpp"

namespace cpx {

/// Conjunctive constraints on where a requested attribute may come from.
struct AttributeRestriction {
  std::optional<std::string> schema_id;
  std::optional<Did> issuer_did;
};

struct RequestedAttribute {
  std::string name;
  AttributeRestriction restriction;
};

struct ProofRequest {
  std::string request_id;  // 16 random bytes, hex
  Did verifier_did;        // public DID, or the verifier's peer DID in context
  Bytes nonce;             // 16 fresh bytes, single-use per verifier
  std::vector<RequestedAttribute> requested;
  std::optional<std::int64_t> expiry;  // simulated unix seconds
};

struct DisclosedAttribute {
  std::string name;
  std::string value;
  Bytes salt;
};

struct PresentedCredential {
  CredentialBody body;
  SchnorrSignature issuer_signature;
  std::vector<DisclosedAttribute> disclosed;
};

/// Where a requested attribute is satisfied inside a presentation.
struct AttributeSource {
  std::uint32_t credential_index = 0;
  std::string attribute;
};

/// The "new and distinct cryptographic object": selected credentials with
/// only the requested attributes opened, plus one equal-secret proof tying
/// every included credential to the same holder and to the request nonce.
struct Presentation {
  std::string request_id;
  std::vector<PresentedCredential> credentials;
  KnowledgeProof link_proof;
  std::map<std::string, AttributeSource> mapping;  // requested name -> source
};

/// Named checks, every one of which must pass for acceptance:
/// signature, digest, restriction, link, nonce, revocation, expiry.
struct VerificationResult {
  bool accepted = false;
  std::map<std::string, bool> checks;
  std::map<std::string, std::string> disclosed_values;  // filled on acceptance
};

Json proof_request_to_json(const ProofRequest& req);
ProofRequest proof_request_from_json(const Json& j);
Json presentation_to_json(const GroupParams& params, const Presentation& pres);
Presentation presentation_from_json(const GroupParams& params, const Json& j);
Json verification_result_to_json(const VerificationResult& result);

/// Tracks nonces a verifier has issued and which ones were already accepted.
class NonceTable {
 public:
  void record(const Bytes& nonce);
  bool known(const Bytes& nonce) const;
  bool used(const Bytes& nonce) const;
  void mark_used(const Bytes& nonce);

  /// Persistable form, so batch tools can detect replays across invocations.
  Json to_json() const;
  static NonceTable from_json(const Json& j);

 private:
  std::set<std::string> known_;
  std::set<std::string> used_;
};

/// Default request expiry: 24 simulated hours after creation.
constexpr std::int64_t kDefaultRequestExpirySeconds = 24 * 3600;

/// Build a request with a fresh recorded nonce.  Throws EmptyRequest.
ProofRequest create_proof_request(const Did& verifier_did,
                                  const std::vector<RequestedAttribute>& requested,
                                  std::optional<std::int64_t> expiry,
                                  NonceTable& nonces, SeededRng& rng);

/// One satisfying assignment of wallet credentials to requested attributes.
struct SelectionOption {
  std::map<std::string, std::size_t> attr_to_credential;
  std::vector<std::size_t> credentials_used;  // sorted, deduplicated
};

/// Every satisfying assignment, or the attribute names that cannot be met.
/// The default option uses the fewest credentials, tie-broken toward the
/// most recently issued — but the holder may pick any option (Control).
struct CandidateSelection {
  bool satisfiable = false;
  std::vector<std::string> missing;
  std::vector<SelectionOption> options;
  std::size_t default_option = 0;
};

CandidateSelection select_credentials(const std::vector<IssuedCredential>& wallet,
                                      const ProofRequest& request);

/// A credential together with the blinding the wallet used in its issuance
/// request — needed to prove statements about its link commitment.
struct PresentationSource {
  IssuedCredential credential;
  mpz_class blinding;
};

/// Assemble a presentation disclosing exactly the requested attributes.
/// `consent` is the holder's explicit approval; without it the call fails
/// with ConsentMissing.  Throws SelectionInvalid when the given sources and
/// mapping do not satisfy the request.
Presentation create_presentation(const GroupParams& params,
                                 const ProofRequest& request,
                                 const std::vector<PresentationSource>& sources,
                                 const std::map<std::string, AttributeSource>& mapping,
                                 const LinkSecret& secret, bool consent,
                                 SeededRng& rng);

/// Run all seven named checks.  Pure apart from the nonce table, which is
/// marked used exactly when the presentation is accepted.  Throws
/// UnknownRequest when the request's nonce was never issued by this
/// verifier.
VerificationResult verify_presentation(const GroupParams& params,
                                       const Registry& registry,
                                       const ProofRequest& request,
                                       const Presentation& presentation,
                                       NonceTable& nonces, std::int64_t now);

}  // namespace cpx
