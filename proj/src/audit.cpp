#include "cpx/audit.hpp"

#include <sstream>

#include "cpx/canonical.hpp"
#include "cpx/errors.hpp"

namespace cpx {

namespace {

// True when any string value inside the payload equals `id` — credential
// references may sit at top level or inside arrays (e.g. a presentation
// verifying several credentials at once).
bool payload_references(const Json& payload, const std::string& id) {
  if (payload.is_string()) return payload.get<std::string>() == id;
  if (payload.is_object() || payload.is_array()) {
    for (const auto& item : payload)
      if (payload_references(item, id)) return true;
  }
  return false;
}

}  // namespace

std::string audit_event_type_name(AuditEventType t) {
  switch (t) {
    case AuditEventType::ConnectionEstablished: return "connection_established";
    case AuditEventType::Issued: return "issued";
    case AuditEventType::ConsentGranted: return "consent_granted";
    case AuditEventType::ConsentDenied: return "consent_denied";
    case AuditEventType::Verified: return "verified";
    case AuditEventType::Revoked: return "revoked";
    case AuditEventType::RegistryWrite: return "registry_write";
  }
  return "unknown";
}

AuditEventType audit_event_type_from_name(const std::string& s) {
  if (s == "connection_established") return AuditEventType::ConnectionEstablished;
  if (s == "issued") return AuditEventType::Issued;
  if (s == "consent_granted") return AuditEventType::ConsentGranted;
  if (s == "consent_denied") return AuditEventType::ConsentDenied;
  if (s == "verified") return AuditEventType::Verified;
  if (s == "revoked") return AuditEventType::Revoked;
  if (s == "registry_write") return AuditEventType::RegistryWrite;
  throw ProtocolError(ErrorCode::ValidationError, "unknown audit event type: " + s);
}

Hash32 audit_payload_digest(const Json& payload) {
  CanonicalWriter w;
  w.str("cpx:audit-payload:v1");
  w.str(payload.dump());
  return sha256(w.out());
}

Hash32 audit_event_hash(std::uint64_t index, std::int64_t timestamp,
                        const Did& actor_did, AuditEventType type,
                        const Hash32& payload_digest, const Hash32& prev_hash) {
  CanonicalWriter w;
  w.str("cpx:audit-event:v1");
  w.u64(index);
  w.i64(timestamp);
  w.str(actor_did);
  w.str(audit_event_type_name(type));
  w.raw(payload_digest.data(), payload_digest.size());
  w.raw(prev_hash.data(), prev_hash.size());
  return sha256(w.out());
}

AuditEvent AuditLog::append(std::int64_t timestamp, const Did& actor_did,
                            AuditEventType type, Json payload) {
  AuditEvent e;
  e.index = events_.size();
  e.timestamp = timestamp;
  e.actor_did = actor_did;
  e.event_type = type;
  e.payload = std::move(payload);
  e.payload_digest = audit_payload_digest(e.payload);
  e.prev_hash = events_.empty() ? zero_hash() : events_.back().hash;
  e.hash = audit_event_hash(e.index, e.timestamp, e.actor_did, e.event_type,
                            e.payload_digest, e.prev_hash);
  events_.push_back(e);
  return events_.back();
}

ChainStatus AuditLog::verify_chain() const {
  Hash32 expect_prev = zero_hash();
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const AuditEvent& e = events_[i];
    if (e.index != i) return ChainStatus::Broken(i);
    if (e.prev_hash != expect_prev) return ChainStatus::Broken(i);
    if (e.payload_digest != audit_payload_digest(e.payload))
      return ChainStatus::Broken(i);
    if (e.hash != audit_event_hash(e.index, e.timestamp, e.actor_did, e.event_type,
                                   e.payload_digest, e.prev_hash))
      return ChainStatus::Broken(i);
    expect_prev = e.hash;
  }
  return ChainStatus::Ok();
}

std::vector<AuditEvent> AuditLog::trace_credential(
    const std::string& credential_id) const {
  ChainStatus status = verify_chain();
  if (!status.ok)
    throw ProtocolError(ErrorCode::ChainBroken,
                        "audit chain broken at index " +
                            std::to_string(status.first_bad_index));
  std::vector<AuditEvent> trace;
  for (const auto& e : events_)
    if (payload_references(e.payload, credential_id)) trace.push_back(e);
  return trace;
}

Json AuditLog::event_to_json(const AuditEvent& e) {
  return Json{{"actor_did", e.actor_did},
              {"event_type", audit_event_type_name(e.event_type)},
              {"hash", hash_to_json(e.hash)},
              {"index", e.index},
              {"payload", e.payload},
              {"payload_digest", hash_to_json(e.payload_digest)},
              {"prev_hash", hash_to_json(e.prev_hash)},
              {"timestamp", e.timestamp}};
}

AuditEvent AuditLog::event_from_json(const Json& j) {
  AuditEvent e;
  e.actor_did = require_string(j, "actor_did");
  e.event_type = audit_event_type_from_name(require_string(j, "event_type"));
  e.hash = hash_from_json(require_field(j, "hash"));
  e.index = require_uint(j, "index");
  e.payload = require_field(j, "payload");
  e.payload_digest = hash_from_json(require_field(j, "payload_digest"));
  e.prev_hash = hash_from_json(require_field(j, "prev_hash"));
  e.timestamp = require_int(j, "timestamp");
  return e;
}

std::string AuditLog::export_jsonl() const {
  std::ostringstream out;
  for (const auto& e : events_) out << event_to_json(e).dump() << "\n";
  return out.str();
}

AuditLog AuditLog::import_jsonl(const std::string& text) {
  AuditLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ProtocolError(ErrorCode::ValidationError, "bad JSON line in audit log");
    log.events_.push_back(event_from_json(j));
  }
  return log;
}

}  // namespace cpx
