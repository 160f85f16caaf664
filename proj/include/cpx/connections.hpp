#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "cpx/audit.hpp"
#include "cpx/crypto.hpp"
#include "cpx/jsonio.hpp"
#include "cpx/registry.hpp"
#include "cpx/rng.hpp"
#include "cpx/simtime.hpp"

namespace cpx {

/// One-time-use connection offer.  Carries a fresh inviter peer DID and key;
/// when the inviter is a trust anchor it also carries the anchor's public
/// DID plus a signature under the anchor's registered key, which is what
/// lets the invitee authenticate who is on the other end.
struct Invitation {
  std::string invitation_id;
  Did inviter_peer_did;
  mpz_class inviter_key;
  std::string inviter_inbox;
  std::string formation_mode;  // "face-to-face" | "web" (metadata only)
  std::optional<Did> inviter_public_did;
  std::optional<SchnorrSignature> anchor_signature;
};

Bytes invitation_signing_bytes(const GroupParams& params, const Invitation& inv);
Json invitation_to_json(const GroupParams& params, const Invitation& inv);
Invitation invitation_from_json(const GroupParams& params, const Json& j);

/// Pairwise channel state.  Each side keeps a mirrored copy; the peer DIDs
/// are private to the relationship and never touch the registry.
struct Connection {
  enum class State { Invited, Active, Closed };

  Did my_peer_did;
  KeyPair my_keypair;
  Did their_peer_did;
  mpz_class their_key;
  std::optional<Did> their_public_did;  // set when anchor-authenticated
  State state = State::Invited;
  std::uint64_t next_send_seq = 0;
  std::uint64_t next_recv_seq = 0;
  std::string their_inbox;
  std::string formation_mode;
};

/// Authenticated, sequenced message: the signature covers (from, to, seq,
/// type, payload) so any mutation or replay is rejected by the receiver.
struct Envelope {
  Did from_peer_did;
  Did to_peer_did;
  std::uint64_t seq = 0;
  std::string payload_type;
  Bytes payload;
  SchnorrSignature signature;
};

Bytes envelope_signing_bytes(const Envelope& env);
Json envelope_to_json(const GroupParams& params, const Envelope& env);
Envelope envelope_from_json(const GroupParams& params, const Json& j);

class ConnectionManager;

/// In-process transport: FIFO queues keyed by inbox id, plus a directory of
/// managers used for the synchronous handshake rendezvous (the simulated
/// counterpart of meeting face to face or hitting a website).
class MessageBus {
 public:
  using Observer = std::function<void(const std::string& inbox_id, const Envelope&)>;

  void register_inbox(const std::string& inbox_id, ConnectionManager* mgr);
  void deliver(const std::string& inbox_id, Envelope env);
  std::optional<Envelope> fetch(const std::string& inbox_id);
  ConnectionManager* manager_of(const std::string& inbox_id);
  std::size_t pending(const std::string& inbox_id);

  /// Invoked for every delivered envelope; used to record run traces.
  void set_observer(Observer obs);

 private:
  std::mutex mu_;
  std::map<std::string, std::deque<Envelope>> queues_;
  std::map<std::string, ConnectionManager*> managers_;
  Observer observer_;
};

/// Per-participant connection endpoint: creates and accepts invitations,
/// sends and receives envelopes, owns this side's connection table.
class ConnectionManager {
 public:
  ConnectionManager(const GroupParams& params, MessageBus& bus,
                    const Registry& registry, std::string inbox_id, SeededRng& rng);

  const std::string& inbox_id() const { return inbox_id_; }

  /// Anchors created on the registry announce themselves in invitations.
  void set_public_identity(const Did& did, const KeyPair& keypair);

  /// Throws NoPublicDid when as_public is requested without a registered
  /// public identity.
  Invitation create_invitation(bool as_public, const std::string& formation_mode);

  /// Synchronous exchange: after it returns, both sides hold mirrored
  /// Active connections.  Returns this side's peer DID (the connection
  /// handle).  Throws InvitationReused on a second accept and
  /// AnchorUnresolvable when the advertised anchor cannot be authenticated.
  Did accept_invitation(const Invitation& inv);

  Envelope send(const Did& my_peer_did, const std::string& payload_type,
                const Bytes& payload);
  /// Validate an envelope addressed to one of my connections and advance the
  /// receive counter.  Throws BadSignature / ReplayedOrOutOfOrder /
  /// ConnectionClosed / NotFound.
  Bytes receive(const Envelope& env);
  /// Pop the next undelivered envelope for my inbox, if any.
  std::optional<Envelope> fetch();

  /// Close both sides of the connection; idempotent.
  void close(const Did& my_peer_did);

  const Connection& connection(const Did& my_peer_did) const;
  bool has_connection(const Did& my_peer_did) const {
    return connections_.count(my_peer_did) > 0;
  }
  const std::map<Did, Connection>& connections() const { return connections_; }
  /// My connection whose remote end authenticated as the given public DID.
  std::optional<Did> connection_with_anchor(const Did& public_did) const;

  void attach_audit(AuditLog* log, SimClock* clock);

  // Called by the peer's manager during the handshake / close rendezvous.
  Did complete_invitation(const std::string& invitation_id, const Did& their_peer_did,
                          const mpz_class& their_key, const std::string& their_inbox);
  void close_from_peer(const Did& my_peer_did);

 private:
  struct PendingInvitation {
    Invitation invitation;
    KeyPair keypair;
    bool used = false;
  };

  Connection& connection_mut(const Did& my_peer_did);

  const GroupParams* params_;
  MessageBus* bus_;
  const Registry* registry_;
  std::string inbox_id_;
  SeededRng* rng_;
  std::optional<Did> public_did_;
  std::optional<KeyPair> public_keypair_;
  std::map<std::string, PendingInvitation> pending_;
  std::map<Did, Connection> connections_;
  AuditLog* audit_ = nullptr;
  SimClock* clock_ = nullptr;
};

}  // namespace cpx
