#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpx/crypto.hpp"
#include "cpx/group.hpp"
#include "cpx/jsonio.hpp"

namespace cpx {

/// Decentralized identifier, method "did:cpx".  Public (anchor) DIDs are
/// derived from the verification key and published on the registry; peer
/// DIDs carry an extra "peer:" segment and are exchanged privately only.
using Did = std::string;

Did did_from_pk(const GroupParams& params, const mpz_class& pk);
Did peer_did_from_pk(const GroupParams& params, const mpz_class& pk);
bool is_peer_did(const Did& did);

struct DidDocument {
  Did did;
  mpz_class verification_key;
  std::string label;     // display name, e.g. "General Medical Council"
  std::string inbox_id;  // logical delivery address on the message bus
};

struct CredentialSchema {
  std::string schema_id;  // "name:version"
  std::vector<std::string> attribute_names;
};

struct RevocationList {
  Did issuer_did;
  std::set<std::string> revoked_ids;
  std::uint64_t version = 0;
};

enum class EntryKind { DidDocument, CredentialSchema, RevocationList };

std::string entry_kind_name(EntryKind k);
EntryKind entry_kind_from_name(const std::string& s);

struct RegistryEntry {
  std::uint64_t sequence_number = 0;
  EntryKind kind = EntryKind::DidDocument;
  Json payload;
  Did author_did;
  SchnorrSignature author_signature;
};

// Canonical byte strings signed by publishers.
Bytes did_document_signing_bytes(const GroupParams& params, const DidDocument& doc);
Bytes schema_signing_bytes(const GroupParams& params, const CredentialSchema& schema,
                           const Did& author_did);
Bytes revocation_signing_bytes(const GroupParams& params, const RevocationList& list);

Json did_document_to_json(const GroupParams& params, const DidDocument& doc);
DidDocument did_document_from_json(const GroupParams& params, const Json& j);
Json schema_to_json(const CredentialSchema& schema);
CredentialSchema schema_from_json(const Json& j);
Json revocation_to_json(const RevocationList& list);
RevocationList revocation_from_json(const Json& j);

/// The simulated verifiable data registry: one in-process append-only log of
/// signed public entries, resolvable by anyone.  Entries are never mutated
/// or deleted; later snapshots always extend earlier ones.
class Registry {
 public:
  explicit Registry(const GroupParams& params) : params_(&params) {}

  /// Anchor a public DID.  The document must be self-signed.
  std::uint64_t publish_did(const DidDocument& doc, const SchnorrSignature& self_sig);
  DidDocument resolve(const Did& did) const;
  bool has_did(const Did& did) const { return dids_.count(did) > 0; }

  std::uint64_t publish_schema(const CredentialSchema& schema, const Did& author_did,
                               const SchnorrSignature& sig);
  CredentialSchema resolve_schema(const std::string& schema_id) const;
  bool has_schema(const std::string& schema_id) const {
    return schemas_.count(schema_id) > 0;
  }

  std::uint64_t publish_revocation(const RevocationList& list,
                                   const SchnorrSignature& sig);
  bool is_revoked(const Did& issuer_did, const std::string& credential_id) const;
  /// Latest published list for the issuer, or an empty version-0 list.
  RevocationList revocation_of(const Did& issuer_did) const;

  const std::vector<RegistryEntry>& entries() const { return entries_; }
  const GroupParams& params() const { return *params_; }

  /// Snapshot in sequence order; import re-validates every signature.
  Json export_snapshot() const;
  static Registry import_snapshot(const GroupParams& params, const Json& snapshot);

 private:
  std::uint64_t append(EntryKind kind, Json payload, const Did& author,
                       const SchnorrSignature& sig);

  const GroupParams* params_;
  std::vector<RegistryEntry> entries_;
  std::map<Did, DidDocument> dids_;
  std::map<std::string, CredentialSchema> schemas_;
  std::map<Did, RevocationList> revocations_;
};

}  // namespace cpx
