#pragma once

#include <json.hpp>

#include "cpx/bytes.hpp"
#include "cpx/crypto.hpp"
#include "cpx/group.hpp"
#include "cpx/hash.hpp"

namespace cpx {

/// All wire and file formats in this library are JSON with bytewise-sorted
/// object keys (the default std::map backing), so serialization is
/// deterministic.  Binary payloads travel base64; 32-byte digests travel as
/// lowercase hex for easy eyeballing in logs and checksums.
using Json = nlohmann::json;

Json bytes_to_json(const Bytes& b);
Bytes bytes_from_json(const Json& j);

Json hash_to_json(const Hash32& h);
Hash32 hash_from_json(const Json& j);

Json element_to_json(const GroupParams& params, const mpz_class& x);
mpz_class element_from_json(const GroupParams& params, const Json& j);

Json scalar_to_json(const GroupParams& params, const mpz_class& x);
mpz_class scalar_from_json(const GroupParams& params, const Json& j);

Json sig_to_json(const GroupParams& params, const SchnorrSignature& sig);
SchnorrSignature sig_from_json(const GroupParams& params, const Json& j);

Json proof_to_json(const GroupParams& params, const KnowledgeProof& proof);
KnowledgeProof proof_from_json(const GroupParams& params, const Json& j);

Json salted_digest_to_json(const SaltedDigest& sd);
SaltedDigest salted_digest_from_json(const Json& j);

/// Fetch j[key], throwing ValidationError (never nlohmann's own exceptions)
/// when the key is absent or the type mismatches.
const Json& require_field(const Json& j, const char* key);
std::string require_string(const Json& j, const char* key);
std::int64_t require_int(const Json& j, const char* key);
std::uint64_t require_uint(const Json& j, const char* key);

}  // namespace cpx
