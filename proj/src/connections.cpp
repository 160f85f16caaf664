#include "cpx/connections.hpp"

#include "cpx/canonical.hpp"
#include "cpx/errors.hpp"

namespace cpx {

namespace {

constexpr const char* kInvitationLabel = "cpx:invitation:v1";
constexpr const char* kEnvelopeLabel = "cpx:envelope:v1";

}  // namespace

Bytes invitation_signing_bytes(const GroupParams& params, const Invitation& inv) {
  CanonicalWriter w;
  w.str(kInvitationLabel);
  w.str(inv.invitation_id);
  w.str(inv.inviter_peer_did);
  w.bytes(params.encode_element(inv.inviter_key));
  w.str(inv.inviter_inbox);
  w.str(inv.formation_mode);
  w.str(inv.inviter_public_did.value_or(""));
  return w.take();
}

Json invitation_to_json(const GroupParams& params, const Invitation& inv) {
  Json j{{"formation_mode", inv.formation_mode},
         {"invitation_id", inv.invitation_id},
         {"inviter_inbox", inv.inviter_inbox},
         {"inviter_key", element_to_json(params, inv.inviter_key)},
         {"inviter_peer_did", inv.inviter_peer_did}};
  if (inv.inviter_public_did) j["inviter_public_did"] = *inv.inviter_public_did;
  if (inv.anchor_signature)
    j["anchor_signature"] = sig_to_json(params, *inv.anchor_signature);
  return j;
}

Invitation invitation_from_json(const GroupParams& params, const Json& j) {
  Invitation inv;
  inv.invitation_id = require_string(j, "invitation_id");
  inv.inviter_peer_did = require_string(j, "inviter_peer_did");
  inv.inviter_key = element_from_json(params, require_field(j, "inviter_key"));
  inv.inviter_inbox = require_string(j, "inviter_inbox");
  inv.formation_mode = require_string(j, "formation_mode");
  if (j.contains("inviter_public_did"))
    inv.inviter_public_did = require_string(j, "inviter_public_did");
  if (j.contains("anchor_signature"))
    inv.anchor_signature = sig_from_json(params, j.at("anchor_signature"));
  return inv;
}

Bytes envelope_signing_bytes(const Envelope& env) {
  CanonicalWriter w;
  w.str(kEnvelopeLabel);
  w.str(env.from_peer_did);
  w.str(env.to_peer_did);
  w.u64(env.seq);
  w.str(env.payload_type);
  w.bytes(env.payload);
  return w.take();
}

Json envelope_to_json(const GroupParams& params, const Envelope& env) {
  return Json{{"from_peer_did", env.from_peer_did},
              {"payload", bytes_to_json(env.payload)},
              {"payload_type", env.payload_type},
              {"seq", env.seq},
              {"signature", sig_to_json(params, env.signature)},
              {"to_peer_did", env.to_peer_did}};
}

Envelope envelope_from_json(const GroupParams& params, const Json& j) {
  Envelope env;
  env.from_peer_did = require_string(j, "from_peer_did");
  env.to_peer_did = require_string(j, "to_peer_did");
  env.seq = require_uint(j, "seq");
  env.payload_type = require_string(j, "payload_type");
  env.payload = bytes_from_json(require_field(j, "payload"));
  env.signature = sig_from_json(params, require_field(j, "signature"));
  return env;
}

void MessageBus::register_inbox(const std::string& inbox_id, ConnectionManager* mgr) {
  std::lock_guard<std::mutex> lock(mu_);
  managers_[inbox_id] = mgr;
  queues_.emplace(inbox_id, std::deque<Envelope>{});
}

void MessageBus::deliver(const std::string& inbox_id, Envelope env) {
  Observer obs;
  {
    std::lock_guard<std::mutex> lock(mu_);
    queues_[inbox_id].push_back(env);
    obs = observer_;
  }
  if (obs) obs(inbox_id, env);
}

void MessageBus::set_observer(Observer obs) {
  std::lock_guard<std::mutex> lock(mu_);
  observer_ = std::move(obs);
}

std::optional<Envelope> MessageBus::fetch(const std::string& inbox_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = queues_.find(inbox_id);
  if (it == queues_.end() || it->second.empty()) return std::nullopt;
  Envelope env = std::move(it->second.front());
  it->second.pop_front();
  return env;
}

ConnectionManager* MessageBus::manager_of(const std::string& inbox_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = managers_.find(inbox_id);
  return it == managers_.end() ? nullptr : it->second;
}

std::size_t MessageBus::pending(const std::string& inbox_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = queues_.find(inbox_id);
  return it == queues_.end() ? 0 : it->second.size();
}

ConnectionManager::ConnectionManager(const GroupParams& params, MessageBus& bus,
                                     const Registry& registry, std::string inbox_id,
                                     SeededRng& rng)
    : params_(&params),
      bus_(&bus),
      registry_(&registry),
      inbox_id_(std::move(inbox_id)),
      rng_(&rng) {
  bus_->register_inbox(inbox_id_, this);
}

void ConnectionManager::set_public_identity(const Did& did, const KeyPair& keypair) {
  public_did_ = did;
  public_keypair_ = keypair;
}

void ConnectionManager::attach_audit(AuditLog* log, SimClock* clock) {
  audit_ = log;
  clock_ = clock;
}

Invitation ConnectionManager::create_invitation(bool as_public,
                                                const std::string& formation_mode) {
  if (as_public && !public_did_)
    throw ProtocolError(ErrorCode::NoPublicDid,
                        "cannot create a public invitation without a registered DID");
  PendingInvitation pending;
  pending.keypair = keygen(*params_, *rng_);
  Invitation inv;
  inv.invitation_id = hex_encode(rng_->bytes(16));
  inv.inviter_peer_did = peer_did_from_pk(*params_, pending.keypair.pk);
  inv.inviter_key = pending.keypair.pk;
  inv.inviter_inbox = inbox_id_;
  inv.formation_mode = formation_mode;
  if (as_public) {
    inv.inviter_public_did = *public_did_;
    inv.anchor_signature =
        sign(*params_, public_keypair_->sk, invitation_signing_bytes(*params_, inv),
             *rng_);
  }
  pending.invitation = inv;
  pending_[inv.invitation_id] = pending;
  return inv;
}

Did ConnectionManager::accept_invitation(const Invitation& inv) {
  std::optional<Did> anchor;
  if (inv.inviter_public_did) {
    DidDocument doc;
    try {
      doc = registry_->resolve(*inv.inviter_public_did);
    } catch (const ProtocolError&) {
      throw ProtocolError(ErrorCode::AnchorUnresolvable,
                          "anchor not on registry: " + *inv.inviter_public_did);
    }
    if (!inv.anchor_signature ||
        !verify_sig(*params_, doc.verification_key,
                    invitation_signing_bytes(*params_, inv), *inv.anchor_signature))
      throw ProtocolError(ErrorCode::AnchorUnresolvable,
                          "invitation not signed by the advertised anchor");
    anchor = inv.inviter_public_did;
  }
  ConnectionManager* inviter = bus_->manager_of(inv.inviter_inbox);
  if (inviter == nullptr)
    throw ProtocolError(ErrorCode::NotFound,
                        "no endpoint behind inbox " + inv.inviter_inbox);

  Connection conn;
  conn.my_keypair = keygen(*params_, *rng_);
  conn.my_peer_did = peer_did_from_pk(*params_, conn.my_keypair.pk);
  conn.their_peer_did = inv.inviter_peer_did;
  conn.their_key = inv.inviter_key;
  conn.their_public_did = anchor;
  conn.their_inbox = inv.inviter_inbox;
  conn.formation_mode = inv.formation_mode;

  // Rendezvous: the inviter validates one-time use and installs the mirror.
  inviter->complete_invitation(inv.invitation_id, conn.my_peer_did,
                               conn.my_keypair.pk, inbox_id_);
  conn.state = Connection::State::Active;
  connections_[conn.my_peer_did] = conn;
  return conn.my_peer_did;
}

Did ConnectionManager::complete_invitation(const std::string& invitation_id,
                                           const Did& their_peer_did,
                                           const mpz_class& their_key,
                                           const std::string& their_inbox) {
  auto it = pending_.find(invitation_id);
  if (it == pending_.end() || it->second.used)
    throw ProtocolError(ErrorCode::InvitationReused,
                        "invitation already consumed or unknown");
  it->second.used = true;

  Connection conn;
  conn.my_keypair = it->second.keypair;
  conn.my_peer_did = it->second.invitation.inviter_peer_did;
  conn.their_peer_did = their_peer_did;
  conn.their_key = their_key;
  conn.their_inbox = their_inbox;
  conn.formation_mode = it->second.invitation.formation_mode;
  conn.state = Connection::State::Active;
  connections_[conn.my_peer_did] = conn;

  if (audit_ != nullptr && clock_ != nullptr) {
    Json payload{{"formation_mode", conn.formation_mode},
                 {"invitee_peer_did", their_peer_did},
                 {"inviter_peer_did", conn.my_peer_did}};
    if (it->second.invitation.inviter_public_did)
      payload["anchor_did"] = *it->second.invitation.inviter_public_did;
    Did actor = public_did_ ? *public_did_ : conn.my_peer_did;
    audit_->append(clock_->now(), actor, AuditEventType::ConnectionEstablished,
                   payload);
  }
  return conn.my_peer_did;
}

Envelope ConnectionManager::send(const Did& my_peer_did,
                                 const std::string& payload_type,
                                 const Bytes& payload) {
  Connection& conn = connection_mut(my_peer_did);
  if (conn.state != Connection::State::Active)
    throw ProtocolError(ErrorCode::ConnectionClosed,
                        "connection is not active: " + my_peer_did);
  Envelope env;
  env.from_peer_did = conn.my_peer_did;
  env.to_peer_did = conn.their_peer_did;
  env.seq = conn.next_send_seq++;
  env.payload_type = payload_type;
  env.payload = payload;
  env.signature =
      sign(*params_, conn.my_keypair.sk, envelope_signing_bytes(env), *rng_);
  bus_->deliver(conn.their_inbox, env);
  return env;
}

Bytes ConnectionManager::receive(const Envelope& env) {
  auto it = connections_.find(env.to_peer_did);
  if (it == connections_.end())
    throw ProtocolError(ErrorCode::NotFound,
                        "no connection for " + env.to_peer_did);
  Connection& conn = it->second;
  if (conn.state == Connection::State::Closed)
    throw ProtocolError(ErrorCode::ConnectionClosed,
                        "connection closed: " + env.to_peer_did);
  if (env.from_peer_did != conn.their_peer_did ||
      !verify_sig(*params_, conn.their_key, envelope_signing_bytes(env),
                  env.signature))
    throw ProtocolError(ErrorCode::BadSignature, "envelope failed authentication");
  if (env.seq != conn.next_recv_seq)
    throw ProtocolError(ErrorCode::ReplayedOrOutOfOrder,
                        "expected seq " + std::to_string(conn.next_recv_seq) +
                            ", got " + std::to_string(env.seq));
  conn.next_recv_seq += 1;
  return env.payload;
}

std::optional<Envelope> ConnectionManager::fetch() { return bus_->fetch(inbox_id_); }

void ConnectionManager::close(const Did& my_peer_did) {
  Connection& conn = connection_mut(my_peer_did);
  if (conn.state == Connection::State::Closed) return;
  conn.state = Connection::State::Closed;
  ConnectionManager* peer = bus_->manager_of(conn.their_inbox);
  if (peer != nullptr) peer->close_from_peer(conn.their_peer_did);
}

void ConnectionManager::close_from_peer(const Did& my_peer_did) {
  auto it = connections_.find(my_peer_did);
  if (it == connections_.end()) return;
  it->second.state = Connection::State::Closed;
}

const Connection& ConnectionManager::connection(const Did& my_peer_did) const {
  auto it = connections_.find(my_peer_did);
  if (it == connections_.end())
    throw ProtocolError(ErrorCode::NotFound, "no connection for " + my_peer_did);
  return it->second;
}

Connection& ConnectionManager::connection_mut(const Did& my_peer_did) {
  auto it = connections_.find(my_peer_did);
  if (it == connections_.end())
    throw ProtocolError(ErrorCode::NotFound, "no connection for " + my_peer_did);
  return it->second;
}

std::optional<Did> ConnectionManager::connection_with_anchor(
    const Did& public_did) const {
  for (const auto& [handle, conn] : connections_)
    if (conn.their_public_did == public_did &&
        conn.state == Connection::State::Active)
      return handle;
  return std::nullopt;
}

}  // namespace cpx
