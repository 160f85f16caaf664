#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpx/audit.hpp"
#include "cpx/connections.hpp"
#include "cpx/credentials.hpp"
#include "cpx/presentation.hpp"
#include "cpx/registry.hpp"
#include "cpx/simtime.hpp"

namespace cpx {

enum class AgentRole { Holder, Issuer, Verifier, Mixed };

std::string agent_role_name(AgentRole r);

struct ConsentEntry {
  std::string request_id;
  std::string decision;  // "allow" | "deny"
  std::int64_t timestamp = 0;
  std::string policy;  // "interactive", "always-ask", or a rule id
};

/// How a holder answers proof requests.  Interactive and AlwaysAsk take the
/// scripted answer (standing in for a human tap); Rule mode walks the rule
/// list, first match wins, falling back to default_allow.
struct ConsentRule {
  std::string id;
  std::optional<Did> verifier_did;  // match requests from this verifier; empty = any
  bool allow = true;
};

struct ConsentPolicy {
  enum class Mode { Interactive, AlwaysAsk, Rule };
  Mode mode = Mode::Interactive;
  bool scripted_answer = true;
  std::vector<ConsentRule> rules;
  bool default_allow = false;
};

struct ConsentDecision {
  bool allow = false;
  std::string policy_label;
};

ConsentDecision decide_consent(const ProofRequest& request,
                               const ConsentPolicy& policy);

/// A credential as the wallet keeps it: the issued object plus the blinding
/// used in its request, which later presentations need.
struct StoredCredential {
  IssuedCredential credential;
  mpz_class blinding;
};

/// Issuance state parked between request and delivery.
struct PendingIssuance {
  CredentialOffer offer;
  mpz_class blinding;
  mpz_class commitment;
};

constexpr int kWalletExportVersion = 1;

/// The holder's store: one link secret, credentials, consent log, and a view
/// of this agent's connections.  Everything in it is enumerable by its owner
/// and exportable to a checksummed file.
class Wallet {
 public:
  Wallet(const GroupParams& params, SeededRng& rng);
  Wallet(const GroupParams& params, LinkSecret secret);

  const LinkSecret& link_secret() const { return secret_; }

  void add_credential(StoredCredential sc);
  const std::vector<StoredCredential>& credentials() const { return credentials_; }
  std::vector<IssuedCredential> issued_list() const;
  const StoredCredential* find_credential(const std::string& credential_id) const;

  void log_consent(const ConsentEntry& entry);
  const std::vector<ConsentEntry>& consent_log() const { return consent_log_; }

  // in-flight issuance state, keyed by connection handle
  void set_pending_offer(const Did& conn, const CredentialOffer& offer);
  std::optional<CredentialOffer> take_pending_offer(const Did& conn);
  void set_pending_issuance(const Did& conn, PendingIssuance pending);
  std::optional<PendingIssuance> take_pending_issuance(const Did& conn);

  /// Live connection source for inventory/export (owning agent wires this).
  void set_connection_source(const ConnectionManager* mgr) { live_connections_ = mgr; }
  /// Connection records captured by an import.
  void set_connection_records(std::vector<Json> records);
  std::vector<Json> connection_records(const GroupParams& params) const;

  /// Full inventory: every credential with values, every connection, the
  /// whole consent log.  Nothing withheld.
  Json list_all_data(const GroupParams& params) const;

  /// Versioned canonical JSON followed by a 32-byte checksum trailer line.
  std::string export_wallet(const GroupParams& params) const;
  /// Throws CorruptExport on any checksum mismatch, UnsupportedVersion on a
  /// version this build does not read, ValidationError when any stored
  /// credential fails its signature/digest/commitment checks.
  static Wallet import_wallet(const GroupParams& params, const Registry& registry,
                              const std::string& text);

  /// One-link-secret invariant: prove and verify equality of the secret
  /// across every stored credential commitment.
  bool self_check(const GroupParams& params, SeededRng& rng) const;

 private:
  const GroupParams* params_;
  LinkSecret secret_;
  std::vector<StoredCredential> credentials_;
  std::vector<ConsentEntry> consent_log_;
  std::map<Did, CredentialOffer> pending_offers_;
  std::map<Did, PendingIssuance> pending_issuances_;
  const ConnectionManager* live_connections_ = nullptr;
  std::vector<Json> imported_connections_;
};

struct AgentConfig {
  std::string name;   // short id, e.g. "doctor", "gmc"
  std::string label;  // display name, e.g. "General Medical Council"
  AgentRole role = AgentRole::Holder;
};

/// How an issuance or verification round ended, from this agent's side.
struct IssueReceipt {
  bool accepted = false;
  std::string credential_id;
  std::string refusal_reason;
};

/// A protocol participant: wallet + connection endpoint + role-specific
/// state, driven by envelopes arriving on its inbox.
class Agent {
 public:
  Agent(const GroupParams& params, Registry& registry, MessageBus& bus,
        AuditLog& audit, SimClock& clock, AgentConfig cfg, std::uint64_t seed);

  const AgentConfig& config() const { return cfg_; }
  const std::string& name() const { return cfg_.name; }
  /// Stable log identity: the public DID once registered, otherwise a local
  /// identifier that never appears on the registry.
  Did actor_did() const;

  bool has_public_did() const { return public_did_.has_value(); }
  const Did& public_did() const;
  const KeyPair& public_keypair() const;
  /// Keygen + self-signed DidDocument on the registry (trust anchors only).
  void register_public_did();
  void publish_schema(const CredentialSchema& schema);

  Invitation invite(bool as_public, const std::string& formation_mode);
  Did accept(const Invitation& inv);

  ConnectionManager& connections() { return manager_; }
  const ConnectionManager& connections() const { return manager_; }
  Wallet& wallet() { return wallet_; }
  const Wallet& wallet() const { return wallet_; }
  SeededRng& rng() { return rng_; }

  void set_consent_policy(ConsentPolicy policy) { consent_policy_ = std::move(policy); }
  const ConsentPolicy& consent_policy() const { return consent_policy_; }
  void set_auto_approve_offers(bool approve) { auto_approve_offers_ = approve; }
  /// Override which selection option a holder presents (Control principle).
  using SelectionChooser = std::function<std::size_t(
      const CandidateSelection&, const std::vector<IssuedCredential>&)>;
  void set_selection_chooser(SelectionChooser chooser) {
    selection_chooser_ = std::move(chooser);
  }

  /// Drain the inbox, handling each envelope per its payload type.
  std::size_t process_inbox();

  // --- issuer side ---
  void send_offer(const Did& conn_handle, const std::string& schema_id,
                  const std::map<std::string, std::string>& values);
  const std::map<std::string, Did>& issued_ids() const { return issued_ids_; }
  std::uint64_t revoke_credential(const std::string& credential_id,
                                  const std::string& reason);

  // --- verifier side ---
  std::string send_proof_request(const Did& conn_handle,
                                 const std::vector<RequestedAttribute>& requested);
  std::optional<VerificationResult> verification_result(
      const std::string& request_id) const;
  std::optional<std::string> problem_report(const std::string& request_id) const;
  const NonceTable& nonces() const { return nonces_; }

  // --- holder side ---
  std::optional<IssueReceipt> last_issue_receipt() const { return last_receipt_; }

 private:
  void handle_envelope(const Envelope& env);
  void handle_offer(const Did& conn, const Json& payload);
  void handle_request(const Did& conn, const Json& payload);
  void handle_issue(const Did& conn, const Json& payload);
  void handle_proof_request(const Did& conn, const Json& payload);
  void handle_presentation(const Did& conn, const Json& payload);
  void handle_problem(const Did& conn, const Json& payload);
  void send_json(const Did& conn, const std::string& type, const Json& payload);
  void audit_event(AuditEventType type, Json payload);

  const GroupParams* params_;
  Registry* registry_;
  AuditLog* audit_;
  SimClock* clock_;
  AgentConfig cfg_;
  SeededRng rng_;
  ConnectionManager manager_;
  Wallet wallet_;
  std::optional<Did> public_did_;
  std::optional<KeyPair> public_keypair_;
  ConsentPolicy consent_policy_;
  bool auto_approve_offers_ = true;
  SelectionChooser selection_chooser_;

  // issuer state
  std::map<Did, CredentialOffer> offers_out_;       // conn handle -> offer
  std::map<std::string, Did> issued_ids_;           // credential_id -> conn handle
  std::map<std::string, std::string> issued_schema_;  // credential_id -> schema

  // verifier state
  NonceTable nonces_;
  std::map<std::string, ProofRequest> outstanding_;  // request_id -> request
  std::map<std::string, VerificationResult> results_;
  std::map<std::string, std::string> problems_;  // request_id -> reason

  // holder state
  std::optional<IssueReceipt> last_receipt_;
};

}  // namespace cpx
