#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpx/hash.hpp"
#include "cpx/jsonio.hpp"
#include "cpx/registry.hpp"

namespace cpx {

enum class AuditEventType {
  ConnectionEstablished,
  Issued,
  ConsentGranted,
  ConsentDenied,
  Verified,
  Revoked,
  RegistryWrite,
};

std::string audit_event_type_name(AuditEventType t);
AuditEventType audit_event_type_from_name(const std::string& s);

/// One link in the hash chain.  Payloads hold references only (actor DIDs,
/// credential ids, request ids, digests) — never attribute values — so the
/// trail itself cannot leak personal data.
struct AuditEvent {
  std::uint64_t index = 0;
  std::int64_t timestamp = 0;
  Did actor_did;
  AuditEventType event_type = AuditEventType::RegistryWrite;
  Json payload;
  Hash32 payload_digest{};
  Hash32 prev_hash{};
  Hash32 hash{};
};

Hash32 audit_payload_digest(const Json& payload);
Hash32 audit_event_hash(std::uint64_t index, std::int64_t timestamp,
                        const Did& actor_did, AuditEventType type,
                        const Hash32& payload_digest, const Hash32& prev_hash);

/// verify_chain outcome: ok, or the index of the first event whose stored
/// fields fail recomputation.
struct ChainStatus {
  bool ok = true;
  std::uint64_t first_bad_index = 0;
  static ChainStatus Ok() { return ChainStatus{true, 0}; }
  static ChainStatus Broken(std::uint64_t i) { return ChainStatus{false, i}; }
};

/// Append-only, hash-chained ecosystem event log.  The genesis event links
/// to 32 zero bytes; every later event links to its predecessor's hash.
class AuditLog {
 public:
  AuditEvent append(std::int64_t timestamp, const Did& actor_did,
                    AuditEventType type, Json payload);

  const std::vector<AuditEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  /// Recompute every digest and link; reports the first index that fails.
  ChainStatus verify_chain() const;

  /// All events referencing the credential id, in index order.
  /// Throws ChainBroken when the log fails verify_chain.
  std::vector<AuditEvent> trace_credential(const std::string& credential_id) const;

  /// JSON-lines, one canonical event object per line.
  std::string export_jsonl() const;
  static AuditLog import_jsonl(const std::string& text);

  static Json event_to_json(const AuditEvent& e);
  static AuditEvent event_from_json(const Json& j);

 private:
  std::vector<AuditEvent> events_;
};

}  // namespace cpx
