#include "cpx/registry.hpp"

#include <algorithm>

#include "cpx/canonical.hpp"
#include "cpx/errors.hpp"

namespace cpx {

namespace {

constexpr const char* kDidPrefix = "did:cpx:";
constexpr const char* kPeerPrefix = "did:cpx:peer:";

std::string key_fingerprint(const GroupParams& params, const mpz_class& pk) {
  CanonicalWriter w;
  w.str("cpx:did:v1");
  w.bytes(params.group_id());
  w.bytes(params.encode_element(pk));
  return base32_encode(hash_bytes(sha256(w.out())));
}

void validate_schema(const CredentialSchema& schema) {
  if (schema.schema_id.empty() ||
      schema.schema_id.find(':') == std::string::npos ||
      schema.schema_id.front() == ':' || schema.schema_id.back() == ':')
    throw ProtocolError(ErrorCode::ValidationError,
                        "schema_id must have the form name:version");
  if (schema.attribute_names.empty())
    throw ProtocolError(ErrorCode::ValidationError, "schema needs attributes");
  std::set<std::string> seen;
  for (const auto& name : schema.attribute_names) {
    if (name.empty())
      throw ProtocolError(ErrorCode::ValidationError, "empty attribute name");
    if (!seen.insert(name).second)
      throw ProtocolError(ErrorCode::ValidationError,
                          "duplicate attribute name: " + name);
  }
}

}  // namespace

Did did_from_pk(const GroupParams& params, const mpz_class& pk) {
  return kDidPrefix + key_fingerprint(params, pk);
}

Did peer_did_from_pk(const GroupParams& params, const mpz_class& pk) {
  return kPeerPrefix + key_fingerprint(params, pk);
}

bool is_peer_did(const Did& did) { return did.rfind(kPeerPrefix, 0) == 0; }

std::string entry_kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::DidDocument: return "did_document";
    case EntryKind::CredentialSchema: return "credential_schema";
    case EntryKind::RevocationList: return "revocation_list";
  }
  return "unknown";
}

EntryKind entry_kind_from_name(const std::string& s) {
  if (s == "did_document") return EntryKind::DidDocument;
  if (s == "credential_schema") return EntryKind::CredentialSchema;
  if (s == "revocation_list") return EntryKind::RevocationList;
  throw ProtocolError(ErrorCode::ValidationError, "unknown entry kind: " + s);
}

Bytes did_document_signing_bytes(const GroupParams& params, const DidDocument& doc) {
  CanonicalWriter w;
  w.str("cpx:reg-did:v1");
  w.str(doc.did);
  w.bytes(params.encode_element(doc.verification_key));
  w.str(doc.label);
  w.str(doc.inbox_id);
  return w.take();
}

Bytes schema_signing_bytes(const GroupParams& params, const CredentialSchema& schema,
                           const Did& author_did) {
  (void)params;
  CanonicalWriter w;
  w.str("cpx:reg-schema:v1");
  w.str(author_did);
  w.str(schema.schema_id);
  w.u32(static_cast<uint32_t>(schema.attribute_names.size()));
  for (const auto& name : schema.attribute_names) w.str(name);
  return w.take();
}

Bytes revocation_signing_bytes(const GroupParams& params, const RevocationList& list) {
  (void)params;
  CanonicalWriter w;
  w.str("cpx:reg-revoke:v1");
  w.str(list.issuer_did);
  w.u64(list.version);
  w.u32(static_cast<uint32_t>(list.revoked_ids.size()));
  for (const auto& id : list.revoked_ids) w.str(id);  // std::set: sorted
  return w.take();
}

Json did_document_to_json(const GroupParams& params, const DidDocument& doc) {
  return Json{{"did", doc.did},
              {"inbox_id", doc.inbox_id},
              {"label", doc.label},
              {"verification_key", element_to_json(params, doc.verification_key)}};
}

DidDocument did_document_from_json(const GroupParams& params, const Json& j) {
  DidDocument doc;
  doc.did = require_string(j, "did");
  doc.inbox_id = require_string(j, "inbox_id");
  doc.label = require_string(j, "label");
  doc.verification_key = element_from_json(params, require_field(j, "verification_key"));
  return doc;
}

Json schema_to_json(const CredentialSchema& schema) {
  return Json{{"attribute_names", schema.attribute_names},
              {"schema_id", schema.schema_id}};
}

CredentialSchema schema_from_json(const Json& j) {
  CredentialSchema schema;
  schema.schema_id = require_string(j, "schema_id");
  const Json& names = require_field(j, "attribute_names");
  if (!names.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "attribute_names must be an array");
  for (const auto& n : names) {
    if (!n.is_string())
      throw ProtocolError(ErrorCode::ValidationError, "attribute name must be a string");
    schema.attribute_names.push_back(n.get<std::string>());
  }
  return schema;
}

Json revocation_to_json(const RevocationList& list) {
  return Json{{"issuer_did", list.issuer_did},
              {"revoked_ids", std::vector<std::string>(list.revoked_ids.begin(),
                                                       list.revoked_ids.end())},
              {"version", list.version}};
}

RevocationList revocation_from_json(const Json& j) {
  RevocationList list;
  list.issuer_did = require_string(j, "issuer_did");
  list.version = require_uint(j, "version");
  const Json& ids = require_field(j, "revoked_ids");
  if (!ids.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "revoked_ids must be an array");
  for (const auto& id : ids) {
    if (!id.is_string())
      throw ProtocolError(ErrorCode::ValidationError, "revoked id must be a string");
    list.revoked_ids.insert(id.get<std::string>());
  }
  return list;
}

std::uint64_t Registry::append(EntryKind kind, Json payload, const Did& author,
                               const SchnorrSignature& sig) {
  RegistryEntry entry;
  entry.sequence_number = entries_.size();
  entry.kind = kind;
  entry.payload = std::move(payload);
  entry.author_did = author;
  entry.author_signature = sig;
  entries_.push_back(std::move(entry));
  return entries_.back().sequence_number;
}

std::uint64_t Registry::publish_did(const DidDocument& doc,
                                    const SchnorrSignature& self_sig) {
  if (doc.did != did_from_pk(*params_, doc.verification_key))
    throw ProtocolError(ErrorCode::ValidationError,
                        "did does not match verification key");
  if (dids_.count(doc.did))
    throw ProtocolError(ErrorCode::DuplicateDid, "already published: " + doc.did);
  if (!verify_sig(*params_, doc.verification_key,
                  did_document_signing_bytes(*params_, doc), self_sig))
    throw ProtocolError(ErrorCode::BadSignature, "did document not self-signed");
  dids_[doc.did] = doc;
  return append(EntryKind::DidDocument, did_document_to_json(*params_, doc), doc.did,
                self_sig);
}

DidDocument Registry::resolve(const Did& did) const {
  auto it = dids_.find(did);
  if (it == dids_.end())
    throw ProtocolError(ErrorCode::NotFound, "no such did: " + did);
  return it->second;
}

std::uint64_t Registry::publish_schema(const CredentialSchema& schema,
                                       const Did& author_did,
                                       const SchnorrSignature& sig) {
  validate_schema(schema);
  auto author = dids_.find(author_did);
  if (author == dids_.end())
    throw ProtocolError(ErrorCode::UnknownAuthor, "author not registered: " + author_did);
  if (schemas_.count(schema.schema_id))
    throw ProtocolError(ErrorCode::DuplicateSchema,
                        "schema already published: " + schema.schema_id);
  if (!verify_sig(*params_, author->second.verification_key,
                  schema_signing_bytes(*params_, schema, author_did), sig))
    throw ProtocolError(ErrorCode::BadSignature, "schema signature invalid");
  schemas_[schema.schema_id] = schema;
  return append(EntryKind::CredentialSchema, schema_to_json(schema), author_did, sig);
}

CredentialSchema Registry::resolve_schema(const std::string& schema_id) const {
  auto it = schemas_.find(schema_id);
  if (it == schemas_.end())
    throw ProtocolError(ErrorCode::NotFound, "no such schema: " + schema_id);
  return it->second;
}

std::uint64_t Registry::publish_revocation(const RevocationList& list,
                                           const SchnorrSignature& sig) {
  auto author = dids_.find(list.issuer_did);
  if (author == dids_.end())
    throw ProtocolError(ErrorCode::UnknownAuthor,
                        "issuer not registered: " + list.issuer_did);
  auto prev = revocations_.find(list.issuer_did);
  std::uint64_t prev_version = prev == revocations_.end() ? 0 : prev->second.version;
  if (list.version != prev_version + 1)
    throw ProtocolError(ErrorCode::StaleVersion,
                        "expected version " + std::to_string(prev_version + 1));
  if (prev != revocations_.end()) {
    const auto& old_ids = prev->second.revoked_ids;
    if (!std::includes(list.revoked_ids.begin(), list.revoked_ids.end(),
                       old_ids.begin(), old_ids.end()))
      throw ProtocolError(ErrorCode::ShrinkingSet,
                          "revocation list may only grow");
  }
  if (!verify_sig(*params_, author->second.verification_key,
                  revocation_signing_bytes(*params_, list), sig))
    throw ProtocolError(ErrorCode::BadSignature, "revocation signature invalid");
  revocations_[list.issuer_did] = list;
  return append(EntryKind::RevocationList, revocation_to_json(list), list.issuer_did,
                sig);
}

bool Registry::is_revoked(const Did& issuer_did, const std::string& credential_id) const {
  auto it = revocations_.find(issuer_did);
  if (it == revocations_.end()) return false;
  return it->second.revoked_ids.count(credential_id) > 0;
}

RevocationList Registry::revocation_of(const Did& issuer_did) const {
  auto it = revocations_.find(issuer_did);
  if (it == revocations_.end()) return RevocationList{issuer_did, {}, 0};
  return it->second;
}

Json Registry::export_snapshot() const {
  Json entries = Json::array();
  for (const auto& e : entries_) {
    entries.push_back(Json{{"author_did", e.author_did},
                           {"author_signature", sig_to_json(*params_, e.author_signature)},
                           {"kind", entry_kind_name(e.kind)},
                           {"payload", e.payload},
                           {"sequence_number", e.sequence_number}});
  }
  return Json{{"entries", entries}, {"group", params_->profile()}};
}

Registry Registry::import_snapshot(const GroupParams& params, const Json& snapshot) {
  if (require_string(snapshot, "group") != params.profile())
    throw ProtocolError(ErrorCode::ConfigInvalid,
                        "snapshot was taken under a different group profile");
  const Json& entries = require_field(snapshot, "entries");
  if (!entries.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "entries must be an array");
  Registry reg(params);
  for (const auto& e : entries) {
    std::uint64_t seq = require_uint(e, "sequence_number");
    if (seq != reg.entries_.size())
      throw ProtocolError(ErrorCode::ValidationError, "entries out of sequence");
    EntryKind kind = entry_kind_from_name(require_string(e, "kind"));
    SchnorrSignature sig = sig_from_json(params, require_field(e, "author_signature"));
    const Json& payload = require_field(e, "payload");
    Did author = require_string(e, "author_did");
    switch (kind) {
      case EntryKind::DidDocument:
        reg.publish_did(did_document_from_json(params, payload), sig);
        break;
      case EntryKind::CredentialSchema:
        reg.publish_schema(schema_from_json(payload), author, sig);
        break;
      case EntryKind::RevocationList:
        reg.publish_revocation(revocation_from_json(payload), sig);
        break;
    }
  }
  return reg;
}

}  // namespace cpx
