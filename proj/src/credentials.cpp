#include "cpx/credentials.hpp"

#include "cpx/canonical.hpp"
#include "cpx/errors.hpp"

namespace cpx {

namespace {

constexpr const char* kBodyLabel = "cpx:credential-body:v1";
constexpr std::size_t kNonceLen = 16;

}  // namespace

LinkSecret LinkSecret::generate(const GroupParams& params, SeededRng& rng) {
  return LinkSecret{params.random_nonzero_scalar(rng)};
}

Bytes credential_body_signing_bytes(const GroupParams& params,
                                    const CredentialBody& body) {
  CanonicalWriter w;
  w.str(kBodyLabel);
  w.str(body.credential_id);
  w.str(body.schema_id);
  w.str(body.issuer_did);
  w.str(body.issued_at);
  w.u32(static_cast<uint32_t>(body.digests.size()));
  for (const auto& d : body.digests) w.raw(d.data(), d.size());
  w.bytes(params.encode_element(body.link_commitment));
  return w.take();
}

Json offer_to_json(const CredentialOffer& offer) {
  return Json{{"attribute_preview", offer.attribute_preview},
              {"issuer_did", offer.issuer_did},
              {"offer_nonce", bytes_to_json(offer.offer_nonce)},
              {"schema_id", offer.schema_id}};
}

CredentialOffer offer_from_json(const Json& j) {
  CredentialOffer offer;
  offer.schema_id = require_string(j, "schema_id");
  offer.issuer_did = require_string(j, "issuer_did");
  offer.offer_nonce = bytes_from_json(require_field(j, "offer_nonce"));
  const Json& preview = require_field(j, "attribute_preview");
  if (!preview.is_object())
    throw ProtocolError(ErrorCode::ValidationError,
                        "attribute_preview must be an object");
  for (const auto& [name, value] : preview.items()) {
    if (!value.is_string())
      throw ProtocolError(ErrorCode::ValidationError,
                          "attribute value must be a string");
    offer.attribute_preview[name] = value.get<std::string>();
  }
  return offer;
}

Json request_to_json(const GroupParams& params, const CredentialRequest& req) {
  return Json{{"link_commitment", element_to_json(params, req.link_commitment)},
              {"opening_proof", proof_to_json(params, req.opening_proof)}};
}

CredentialRequest request_from_json(const GroupParams& params, const Json& j) {
  CredentialRequest req;
  req.link_commitment = element_from_json(params, require_field(j, "link_commitment"));
  req.opening_proof = proof_from_json(params, require_field(j, "opening_proof"));
  return req;
}

Json body_to_json(const GroupParams& params, const CredentialBody& body) {
  Json digests = Json::array();
  for (const auto& d : body.digests) digests.push_back(hash_to_json(d));
  return Json{{"credential_id", body.credential_id},
              {"digests", digests},
              {"issued_at", body.issued_at},
              {"issuer_did", body.issuer_did},
              {"link_commitment", element_to_json(params, body.link_commitment)},
              {"schema_id", body.schema_id}};
}

CredentialBody body_from_json(const GroupParams& params, const Json& j) {
  CredentialBody body;
  body.credential_id = require_string(j, "credential_id");
  body.schema_id = require_string(j, "schema_id");
  body.issuer_did = require_string(j, "issuer_did");
  body.issued_at = require_string(j, "issued_at");
  const Json& digests = require_field(j, "digests");
  if (!digests.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "digests must be an array");
  for (const auto& d : digests) body.digests.push_back(hash_from_json(d));
  body.link_commitment = element_from_json(params, require_field(j, "link_commitment"));
  return body;
}

Json issued_to_json(const GroupParams& params, const IssuedCredential& cred) {
  Json salts = Json::object();
  for (const auto& [name, salt] : cred.salts) salts[name] = bytes_to_json(salt);
  return Json{{"body", body_to_json(params, cred.body)},
              {"salts", salts},
              {"signature", sig_to_json(params, cred.signature)},
              {"values", cred.values}};
}

IssuedCredential issued_from_json(const GroupParams& params, const Json& j) {
  IssuedCredential cred;
  cred.body = body_from_json(params, require_field(j, "body"));
  cred.signature = sig_from_json(params, require_field(j, "signature"));
  const Json& values = require_field(j, "values");
  const Json& salts = require_field(j, "salts");
  if (!values.is_object() || !salts.is_object())
    throw ProtocolError(ErrorCode::ValidationError, "values/salts must be objects");
  for (const auto& [name, value] : values.items()) {
    if (!value.is_string())
      throw ProtocolError(ErrorCode::ValidationError, "values must be strings");
    cred.values[name] = value.get<std::string>();
  }
  for (const auto& [name, salt] : salts.items())
    cred.salts[name] = bytes_from_json(salt);
  return cred;
}

CredentialOffer make_offer(const Registry& registry, const Did& issuer_did,
                           const std::string& schema_id,
                           const std::map<std::string, std::string>& values,
                           SeededRng& rng) {
  if (!registry.has_schema(schema_id))
    throw ProtocolError(ErrorCode::UnknownSchema, "schema not published: " + schema_id);
  CredentialSchema schema = registry.resolve_schema(schema_id);
  for (const auto& name : schema.attribute_names)
    if (!values.count(name))
      throw ProtocolError(ErrorCode::MissingAttribute,
                          "offer missing attribute: " + name);
  if (values.size() != schema.attribute_names.size())
    throw ProtocolError(ErrorCode::ValidationError,
                        "offer carries attributes outside the schema");
  CredentialOffer offer;
  offer.schema_id = schema_id;
  offer.attribute_preview = values;
  offer.issuer_did = issuer_did;
  offer.offer_nonce = rng.bytes(kNonceLen);
  return offer;
}

CredentialRequest make_request(const GroupParams& params, const LinkSecret& secret,
                               const CredentialOffer& offer, SeededRng& rng,
                               mpz_class* blinding_out) {
  mpz_class r = params.random_scalar(rng);
  CredentialRequest req;
  req.link_commitment = commit(params, secret.s, r);
  req.opening_proof = prove_commitment_opening(params, req.link_commitment, secret.s,
                                               r, offer.offer_nonce, rng);
  if (blinding_out != nullptr) *blinding_out = r;
  return req;
}

IssuedCredential issue_credential(const GroupParams& params, const Registry& registry,
                                  const Did& issuer_did, const mpz_class& issuer_sk,
                                  const CredentialOffer& offer,
                                  const CredentialRequest& request,
                                  const std::string& issued_at_iso, SeededRng& rng) {
  if (!verify_opening_proof(params, request.link_commitment, request.opening_proof,
                            offer.offer_nonce)) {
    // Distinguish a proof that is sound but bound elsewhere from garbage:
    // transcript-consistent means the algebra holds under its own challenge.
    bool transcript_consistent =
        request.opening_proof.commitment_nonces.size() == 1 &&
        request.opening_proof.responses.size() == 2 &&
        commit(params, request.opening_proof.responses[0],
               request.opening_proof.responses[1]) ==
            params.mul(request.opening_proof.commitment_nonces[0],
                       params.pow(request.link_commitment,
                                  request.opening_proof.challenge));
    if (transcript_consistent)
      throw ProtocolError(ErrorCode::ProofBindingMismatch,
                          "request proof is bound to a different offer");
    throw ProtocolError(ErrorCode::BadRequestProof, "request proof invalid");
  }
  CredentialSchema schema = registry.resolve_schema(offer.schema_id);

  IssuedCredential cred;
  cred.body.credential_id = hex_encode(rng.bytes(16));
  cred.body.schema_id = offer.schema_id;
  cred.body.issuer_did = issuer_did;
  cred.body.issued_at = issued_at_iso;
  cred.body.link_commitment = request.link_commitment;
  for (const auto& name : schema.attribute_names) {
    const std::string& value = offer.attribute_preview.at(name);
    SaltedDigest sd = salted_digest(name, value, rng);
    cred.body.digests.push_back(sd.digest);
    cred.values[name] = value;
    cred.salts[name] = sd.salt;
  }
  cred.signature = sign(params, issuer_sk,
                        credential_body_signing_bytes(params, cred.body), rng);
  return cred;
}

std::optional<std::string> check_issued_credential(
    const GroupParams& params, const Registry& registry, const IssuedCredential& cred,
    const CredentialOffer& approved_offer, const mpz_class& expected_commitment) {
  // Schema consistency: same schema as approved, resolvable, aligned fields.
  if (cred.body.schema_id != approved_offer.schema_id ||
      cred.body.issuer_did != approved_offer.issuer_did)
    return "SchemaMismatch";
  if (!registry.has_schema(cred.body.schema_id)) return "SchemaMismatch";
  CredentialSchema schema = registry.resolve_schema(cred.body.schema_id);
  if (cred.body.digests.size() != schema.attribute_names.size())
    return "SchemaMismatch";
  for (const auto& name : schema.attribute_names)
    if (!cred.values.count(name) || !cred.salts.count(name)) return "SchemaMismatch";
  if (cred.values.size() != schema.attribute_names.size() ||
      cred.salts.size() != schema.attribute_names.size())
    return "SchemaMismatch";

  // Primary-source check: the issuer key comes from the registry, nowhere else.
  DidDocument issuer_doc;
  try {
    issuer_doc = registry.resolve(cred.body.issuer_did);
  } catch (const ProtocolError&) {
    return "UnknownIssuer";
  }
  if (!verify_sig(params, issuer_doc.verification_key,
                  credential_body_signing_bytes(params, cred.body), cred.signature))
    return "BadIssuerSignature";

  // The credential must bind to the commitment this wallet sent, not anyone
  // else's.
  if (cred.body.link_commitment != expected_commitment) return "ForeignCommitment";

  // Digests must open to the shipped values and salts at schema positions.
  for (std::size_t i = 0; i < schema.attribute_names.size(); ++i) {
    const std::string& name = schema.attribute_names[i];
    const Bytes& salt = cred.salts.at(name);
    if (salt.size() != kSaltLen) return "DigestMismatch";
    if (recompute_salted_digest(salt, name, cred.values.at(name)) !=
        cred.body.digests[i])
      return "DigestMismatch";
  }

  // Values must match what the holder approved at offer time.
  for (const auto& [name, value] : approved_offer.attribute_preview)
    if (cred.values.at(name) != value) return "ValueMismatch";

  return std::nullopt;
}

}  // namespace cpx
