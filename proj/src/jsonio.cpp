#include "cpx/jsonio.hpp"

#include "cpx/errors.hpp"

namespace cpx {

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw ProtocolError(ErrorCode::ValidationError, what);
}

}  // namespace

Json bytes_to_json(const Bytes& b) { return base64_encode(b); }

Bytes bytes_from_json(const Json& j) {
  if (!j.is_string()) bad("expected base64 string");
  try {
    return base64_decode(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    bad(std::string("bad base64: ") + e.what());
  }
}

Json hash_to_json(const Hash32& h) { return hex_encode(hash_bytes(h)); }

Hash32 hash_from_json(const Json& j) {
  if (!j.is_string()) bad("expected hex digest string");
  try {
    return hash_from_bytes(hex_decode(j.get<std::string>()));
  } catch (const std::invalid_argument& e) {
    bad(std::string("bad digest: ") + e.what());
  }
}

Json element_to_json(const GroupParams& params, const mpz_class& x) {
  return bytes_to_json(params.encode_element(x));
}

mpz_class element_from_json(const GroupParams& params, const Json& j) {
  return params.decode_element(bytes_from_json(j));
}

Json scalar_to_json(const GroupParams& params, const mpz_class& x) {
  return bytes_to_json(params.encode_scalar(x));
}

mpz_class scalar_from_json(const GroupParams& params, const Json& j) {
  return params.decode_scalar(bytes_from_json(j));
}

Json sig_to_json(const GroupParams& params, const SchnorrSignature& sig) {
  return Json{{"challenge", scalar_to_json(params, sig.challenge)},
              {"response", scalar_to_json(params, sig.response)}};
}

SchnorrSignature sig_from_json(const GroupParams& params, const Json& j) {
  if (!j.is_object()) bad("signature must be an object");
  return SchnorrSignature{scalar_from_json(params, require_field(j, "challenge")),
                          scalar_from_json(params, require_field(j, "response"))};
}

Json proof_to_json(const GroupParams& params, const KnowledgeProof& proof) {
  Json nonces = Json::array();
  for (const auto& t : proof.commitment_nonces)
    nonces.push_back(element_to_json(params, t));
  Json responses = Json::array();
  for (const auto& z : proof.responses) responses.push_back(scalar_to_json(params, z));
  return Json{{"challenge", scalar_to_json(params, proof.challenge)},
              {"commitment_nonces", nonces},
              {"responses", responses}};
}

KnowledgeProof proof_from_json(const GroupParams& params, const Json& j) {
  if (!j.is_object()) bad("proof must be an object");
  const Json& nonces = require_field(j, "commitment_nonces");
  const Json& responses = require_field(j, "responses");
  if (!nonces.is_array() || !responses.is_array()) bad("proof arrays malformed");
  KnowledgeProof proof;
  for (const auto& t : nonces)
    proof.commitment_nonces.push_back(element_from_json(params, t));
  proof.challenge = scalar_from_json(params, require_field(j, "challenge"));
  for (const auto& z : responses)
    proof.responses.push_back(scalar_from_json(params, z));
  return proof;
}

Json salted_digest_to_json(const SaltedDigest& sd) {
  return Json{{"digest", hash_to_json(sd.digest)}, {"salt", bytes_to_json(sd.salt)}};
}

SaltedDigest salted_digest_from_json(const Json& j) {
  if (!j.is_object()) bad("salted digest must be an object");
  SaltedDigest sd;
  sd.salt = bytes_from_json(require_field(j, "salt"));
  if (sd.salt.size() != kSaltLen) bad("salt must be 16 bytes");
  sd.digest = hash_from_json(require_field(j, "digest"));
  return sd;
}

const Json& require_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    bad(std::string("missing field: ") + key);
  return j.at(key);
}

std::string require_string(const Json& j, const char* key) {
  const Json& v = require_field(j, key);
  if (!v.is_string()) bad(std::string("field must be a string: ") + key);
  return v.get<std::string>();
}

std::int64_t require_int(const Json& j, const char* key) {
  const Json& v = require_field(j, key);
  if (!v.is_number_integer()) bad(std::string("field must be an integer: ") + key);
  return v.get<std::int64_t>();
}

std::uint64_t require_uint(const Json& j, const char* key) {
  const Json& v = require_field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    bad(std::string("field must be a non-negative integer: ") + key);
  return v.get<std::uint64_t>();
}

}  // namespace cpx
