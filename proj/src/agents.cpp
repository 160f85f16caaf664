#include "cpx/agents.hpp"

#include <algorithm>

#include "cpx/errors.hpp"

namespace cpx {

namespace {

constexpr const char* kWalletFormat = "cpx-wallet";

std::string connection_state_name(Connection::State s) {
  switch (s) {
    case Connection::State::Invited: return "invited";
    case Connection::State::Active: return "active";
    case Connection::State::Closed: return "closed";
  }
  return "unknown";
}

Json consent_entry_to_json(const ConsentEntry& e) {
  return Json{{"decision", e.decision},
              {"policy", e.policy},
              {"request_id", e.request_id},
              {"timestamp", e.timestamp}};
}

ConsentEntry consent_entry_from_json(const Json& j) {
  ConsentEntry e;
  e.request_id = require_string(j, "request_id");
  e.decision = require_string(j, "decision");
  e.timestamp = require_int(j, "timestamp");
  e.policy = require_string(j, "policy");
  return e;
}

}  // namespace

std::string agent_role_name(AgentRole r) {
  switch (r) {
    case AgentRole::Holder: return "holder";
    case AgentRole::Issuer: return "issuer";
    case AgentRole::Verifier: return "verifier";
    case AgentRole::Mixed: return "mixed";
  }
  return "unknown";
}

ConsentDecision decide_consent(const ProofRequest& request,
                               const ConsentPolicy& policy) {
  switch (policy.mode) {
    case ConsentPolicy::Mode::Interactive:
      return ConsentDecision{policy.scripted_answer, "interactive"};
    case ConsentPolicy::Mode::AlwaysAsk:
      return ConsentDecision{policy.scripted_answer, "always-ask"};
    case ConsentPolicy::Mode::Rule:
      for (const auto& rule : policy.rules)
        if (!rule.verifier_did || *rule.verifier_did == request.verifier_did)
          return ConsentDecision{rule.allow, rule.id};
      return ConsentDecision{policy.default_allow, "rule:default"};
  }
  return ConsentDecision{false, "unreachable"};
}

// --- Wallet ---

Wallet::Wallet(const GroupParams& params, SeededRng& rng)
    : params_(&params), secret_(LinkSecret::generate(params, rng)) {}

Wallet::Wallet(const GroupParams& params, LinkSecret secret)
    : params_(&params), secret_(std::move(secret)) {}

void Wallet::add_credential(StoredCredential sc) {
  credentials_.push_back(std::move(sc));
}

std::vector<IssuedCredential> Wallet::issued_list() const {
  std::vector<IssuedCredential> out;
  out.reserve(credentials_.size());
  for (const auto& sc : credentials_) out.push_back(sc.credential);
  return out;
}

const StoredCredential* Wallet::find_credential(
    const std::string& credential_id) const {
  for (const auto& sc : credentials_)
    if (sc.credential.body.credential_id == credential_id) return &sc;
  return nullptr;
}

void Wallet::log_consent(const ConsentEntry& entry) {
  consent_log_.push_back(entry);
}

void Wallet::set_pending_offer(const Did& conn, const CredentialOffer& offer) {
  pending_offers_[conn] = offer;
}

std::optional<CredentialOffer> Wallet::take_pending_offer(const Did& conn) {
  auto it = pending_offers_.find(conn);
  if (it == pending_offers_.end()) return std::nullopt;
  CredentialOffer offer = it->second;
  pending_offers_.erase(it);
  return offer;
}

void Wallet::set_pending_issuance(const Did& conn, PendingIssuance pending) {
  pending_issuances_[conn] = std::move(pending);
}

std::optional<PendingIssuance> Wallet::take_pending_issuance(const Did& conn) {
  auto it = pending_issuances_.find(conn);
  if (it == pending_issuances_.end()) return std::nullopt;
  PendingIssuance pending = it->second;
  pending_issuances_.erase(it);
  return pending;
}

void Wallet::set_connection_records(std::vector<Json> records) {
  imported_connections_ = std::move(records);
}

std::vector<Json> Wallet::connection_records(const GroupParams& params) const {
  if (live_connections_ == nullptr) return imported_connections_;
  std::vector<Json> records;
  for (const auto& [handle, conn] : live_connections_->connections()) {
    Json j{{"formation_mode", conn.formation_mode},
           {"my_peer_did", conn.my_peer_did},
           {"my_sk", scalar_to_json(params, conn.my_keypair.sk)},
           {"next_recv_seq", conn.next_recv_seq},
           {"next_send_seq", conn.next_send_seq},
           {"state", connection_state_name(conn.state)},
           {"their_inbox", conn.their_inbox},
           {"their_key", element_to_json(params, conn.their_key)},
           {"their_peer_did", conn.their_peer_did}};
    if (conn.their_public_did) j["their_public_did"] = *conn.their_public_did;
    records.push_back(std::move(j));
  }
  return records;
}

Json Wallet::list_all_data(const GroupParams& params) const {
  Json credentials = Json::array();
  for (const auto& sc : credentials_)
    credentials.push_back(Json{{"blinding", scalar_to_json(params, sc.blinding)},
                               {"credential", issued_to_json(params, sc.credential)}});
  Json consents = Json::array();
  for (const auto& e : consent_log_) consents.push_back(consent_entry_to_json(e));
  return Json{{"connections", connection_records(params)},
              {"consent_log", consents},
              {"credentials", credentials},
              {"link_secret", scalar_to_json(params, secret_.s)}};
}

std::string Wallet::export_wallet(const GroupParams& params) const {
  Json inventory = list_all_data(params);
  Json payload{{"connections", inventory["connections"]},
               {"consent_log", inventory["consent_log"]},
               {"credentials", inventory["credentials"]},
               {"format", kWalletFormat},
               {"group", params.profile()},
               {"link_secret", scalar_to_json(params, secret_.s)},
               {"version", kWalletExportVersion}};
  std::string text = payload.dump(2);
  Hash32 checksum = sha256(to_bytes(text));
  return text + "\n" + hex_encode(hash_bytes(checksum)) + "\n";
}

Wallet Wallet::import_wallet(const GroupParams& params, const Registry& registry,
                             const std::string& text) {
  std::string body = text;
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  auto pos = body.rfind('\n');
  if (pos == std::string::npos)
    throw ProtocolError(ErrorCode::CorruptExport, "missing checksum trailer");
  std::string payload_text = body.substr(0, pos);
  std::string trailer = body.substr(pos + 1);
  Hash32 expect = sha256(to_bytes(payload_text));
  if (trailer != hex_encode(hash_bytes(expect)))
    throw ProtocolError(ErrorCode::CorruptExport, "wallet checksum mismatch");

  Json j = Json::parse(payload_text, nullptr, false);
  if (j.is_discarded())
    throw ProtocolError(ErrorCode::ValidationError, "wallet payload is not JSON");
  if (require_string(j, "format") != kWalletFormat)
    throw ProtocolError(ErrorCode::ValidationError, "not a wallet export");
  if (require_int(j, "version") != kWalletExportVersion)
    throw ProtocolError(ErrorCode::UnsupportedVersion,
                        "wallet export version not supported");
  if (require_string(j, "group") != params.profile())
    throw ProtocolError(ErrorCode::ConfigInvalid,
                        "wallet exported under a different group profile");

  LinkSecret secret{scalar_from_json(params, require_field(j, "link_secret"))};
  Wallet wallet(params, secret);

  const Json& credentials = require_field(j, "credentials");
  if (!credentials.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "credentials must be an array");
  for (const auto& c : credentials) {
    StoredCredential sc;
    sc.blinding = scalar_from_json(params, require_field(c, "blinding"));
    sc.credential = issued_from_json(params, require_field(c, "credential"));

    // Tamper-at-rest defense: recheck everything before trusting the record.
    const CredentialBody& body_rec = sc.credential.body;
    if (commit(params, secret.s, sc.blinding) != body_rec.link_commitment)
      throw ProtocolError(ErrorCode::ValidationError,
                          "stored credential does not open under this wallet's secret");
    DidDocument issuer;
    try {
      issuer = registry.resolve(body_rec.issuer_did);
    } catch (const ProtocolError&) {
      throw ProtocolError(ErrorCode::ValidationError,
                          "stored credential names an unknown issuer");
    }
    if (!verify_sig(params, issuer.verification_key,
                    credential_body_signing_bytes(params, body_rec),
                    sc.credential.signature))
      throw ProtocolError(ErrorCode::ValidationError,
                          "stored credential fails signature check");
    CredentialSchema schema = registry.resolve_schema(body_rec.schema_id);
    if (body_rec.digests.size() != schema.attribute_names.size())
      throw ProtocolError(ErrorCode::ValidationError,
                          "stored credential digest count mismatch");
    for (std::size_t i = 0; i < schema.attribute_names.size(); ++i) {
      const std::string& name = schema.attribute_names[i];
      if (!sc.credential.values.count(name) || !sc.credential.salts.count(name) ||
          recompute_salted_digest(sc.credential.salts.at(name), name,
                                  sc.credential.values.at(name)) !=
              body_rec.digests[i])
        throw ProtocolError(ErrorCode::ValidationError,
                            "stored credential fails digest check");
    }
    wallet.add_credential(std::move(sc));
  }

  const Json& consents = require_field(j, "consent_log");
  if (!consents.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "consent_log must be an array");
  for (const auto& e : consents) wallet.log_consent(consent_entry_from_json(e));

  const Json& connections = require_field(j, "connections");
  if (!connections.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "connections must be an array");
  wallet.set_connection_records(
      std::vector<Json>(connections.begin(), connections.end()));
  return wallet;
}

bool Wallet::self_check(const GroupParams& params, SeededRng& rng) const {
  if (credentials_.empty()) return true;
  std::vector<mpz_class> commitments;
  std::vector<mpz_class> blindings;
  for (const auto& sc : credentials_) {
    commitments.push_back(sc.credential.body.link_commitment);
    blindings.push_back(sc.blinding);
  }
  Bytes context = to_bytes("cpx:wallet-self-check");
  KnowledgeProof proof =
      prove_equal_secret(params, commitments, secret_.s, blindings, context, rng);
  return verify_equal_secret(params, commitments, proof, context);
}

// --- Agent ---

Agent::Agent(const GroupParams& params, Registry& registry, MessageBus& bus,
             AuditLog& audit, SimClock& clock, AgentConfig cfg, std::uint64_t seed)
    : params_(&params),
      registry_(&registry),
      audit_(&audit),
      clock_(&clock),
      cfg_(std::move(cfg)),
      rng_(seed),
      manager_(params, bus, registry, cfg_.name + "-inbox", rng_),
      wallet_(params, rng_) {
  manager_.attach_audit(audit_, clock_);
  wallet_.set_connection_source(&manager_);
}

Did Agent::actor_did() const {
  if (public_did_) return *public_did_;
  return "did:cpx:local:" + cfg_.name;
}

const Did& Agent::public_did() const {
  if (!public_did_)
    throw ProtocolError(ErrorCode::NoPublicDid,
                        "agent has no registered DID: " + cfg_.name);
  return *public_did_;
}

const KeyPair& Agent::public_keypair() const {
  if (!public_keypair_)
    throw ProtocolError(ErrorCode::NoPublicDid,
                        "agent has no registered DID: " + cfg_.name);
  return *public_keypair_;
}

void Agent::register_public_did() {
  KeyPair kp = keygen(*params_, rng_);
  // The toy group has only 101 possible keypairs, so two agents can land on
  // the same DID.  A publisher whose DID is already anchored simply
  // generates a fresh key and tries again; draw deterministically from this
  // agent's own stream until the DID is free.
  for (int attempts = 0; registry_->has_did(did_from_pk(*params_, kp.pk));
       ++attempts) {
    if (attempts > 1000)
      throw ProtocolError(ErrorCode::DuplicateDid,
                          "no unanchored DID reachable for: " + cfg_.name);
    kp = keygen(*params_, rng_);
  }
  DidDocument doc;
  doc.did = did_from_pk(*params_, kp.pk);
  doc.verification_key = kp.pk;
  doc.label = cfg_.label;
  doc.inbox_id = manager_.inbox_id();
  SchnorrSignature sig =
      sign(*params_, kp.sk, did_document_signing_bytes(*params_, doc), rng_);
  std::uint64_t seq = registry_->publish_did(doc, sig);
  public_did_ = doc.did;
  public_keypair_ = kp;
  manager_.set_public_identity(doc.did, kp);
  audit_event(AuditEventType::RegistryWrite,
              Json{{"did", doc.did}, {"kind", "did_document"}, {"sequence", seq}});
}

void Agent::publish_schema(const CredentialSchema& schema) {
  const KeyPair& kp = public_keypair();
  SchnorrSignature sig =
      sign(*params_, kp.sk, schema_signing_bytes(*params_, schema, public_did()), rng_);
  std::uint64_t seq = registry_->publish_schema(schema, public_did(), sig);
  audit_event(AuditEventType::RegistryWrite,
              Json{{"kind", "credential_schema"},
                   {"schema_id", schema.schema_id},
                   {"sequence", seq}});
}

Invitation Agent::invite(bool as_public, const std::string& formation_mode) {
  return manager_.create_invitation(as_public, formation_mode);
}

Did Agent::accept(const Invitation& inv) { return manager_.accept_invitation(inv); }

std::size_t Agent::process_inbox() {
  std::size_t handled = 0;
  while (auto env = manager_.fetch()) {
    handle_envelope(*env);
    ++handled;
  }
  return handled;
}

void Agent::send_json(const Did& conn, const std::string& type, const Json& payload) {
  manager_.send(conn, type, to_bytes(payload.dump()));
}

void Agent::audit_event(AuditEventType type, Json payload) {
  audit_->append(clock_->now(), actor_did(), type, std::move(payload));
}

void Agent::handle_envelope(const Envelope& env) {
  Bytes payload_bytes = manager_.receive(env);
  Json payload = Json::parse(to_string(payload_bytes), nullptr, false);
  if (payload.is_discarded())
    throw ProtocolError(ErrorCode::ValidationError, "envelope payload is not JSON");
  const Did& conn = env.to_peer_did;
  if (env.payload_type == "credential-offer") {
    handle_offer(conn, payload);
  } else if (env.payload_type == "credential-request") {
    handle_request(conn, payload);
  } else if (env.payload_type == "credential-issue") {
    handle_issue(conn, payload);
  } else if (env.payload_type == "proof-request") {
    handle_proof_request(conn, payload);
  } else if (env.payload_type == "presentation") {
    handle_presentation(conn, payload);
  } else if (env.payload_type == "problem-report") {
    handle_problem(conn, payload);
  } else if (env.payload_type == "ack") {
    // terminal notification; nothing to do
  } else {
    throw ProtocolError(ErrorCode::ValidationError,
                        "unknown payload type: " + env.payload_type);
  }
}

void Agent::handle_offer(const Did& conn, const Json& payload) {
  CredentialOffer offer = offer_from_json(payload);
  if (!auto_approve_offers_) {
    send_json(conn, "problem-report",
              Json{{"context", "offer"}, {"reason", "OfferDeclined"}});
    return;
  }
  mpz_class blinding;
  CredentialRequest request =
      make_request(*params_, wallet_.link_secret(), offer, rng_, &blinding);
  wallet_.set_pending_issuance(
      conn, PendingIssuance{offer, blinding, request.link_commitment});
  send_json(conn, "credential-request", request_to_json(*params_, request));
}

void Agent::handle_request(const Did& conn, const Json& payload) {
  CredentialRequest request = request_from_json(*params_, payload);
  auto offer_it = offers_out_.find(conn);
  if (offer_it == offers_out_.end()) {
    send_json(conn, "problem-report",
              Json{{"context", "request"}, {"reason", "NoOffer"}});
    return;
  }
  IssuedCredential issued;
  try {
    issued = issue_credential(*params_, *registry_, public_did(),
                              public_keypair().sk, offer_it->second, request,
                              clock_->now_iso(), rng_);
  } catch (const ProtocolError& e) {
    send_json(conn, "problem-report",
              Json{{"context", "request"}, {"reason", error_code_name(e.code())}});
    return;
  }
  offers_out_.erase(offer_it);
  issued_ids_[issued.body.credential_id] = conn;
  issued_schema_[issued.body.credential_id] = issued.body.schema_id;
  audit_event(AuditEventType::Issued,
              Json{{"credential_id", issued.body.credential_id},
                   {"holder_peer_did", manager_.connection(conn).their_peer_did},
                   {"schema_id", issued.body.schema_id}});
  send_json(conn, "credential-issue", issued_to_json(*params_, issued));
}

void Agent::handle_issue(const Did& conn, const Json& payload) {
  IssuedCredential issued = issued_from_json(*params_, payload);
  auto pending = wallet_.take_pending_issuance(conn);
  if (!pending) {
    send_json(conn, "problem-report",
              Json{{"context", "issue"}, {"reason", "NoPendingRequest"}});
    return;
  }
  std::optional<std::string> refusal = check_issued_credential(
      *params_, *registry_, issued, pending->offer, pending->commitment);
  if (refusal) {
    last_receipt_ = IssueReceipt{false, issued.body.credential_id, *refusal};
    send_json(conn, "problem-report",
              Json{{"context", "issue"},
                   {"credential_id", issued.body.credential_id},
                   {"reason", *refusal}});
    return;
  }
  wallet_.add_credential(StoredCredential{issued, pending->blinding});
  last_receipt_ = IssueReceipt{true, issued.body.credential_id, ""};
  send_json(conn, "ack",
            Json{{"context", "issue"},
                 {"credential_id", issued.body.credential_id}});
}

void Agent::handle_proof_request(const Did& conn, const Json& payload) {
  ProofRequest request = proof_request_from_json(payload);
  ConsentDecision decision = decide_consent(request, consent_policy_);
  ConsentEntry entry{request.request_id, decision.allow ? "allow" : "deny",
                     clock_->now(), decision.policy_label};
  wallet_.log_consent(entry);
  audit_event(decision.allow ? AuditEventType::ConsentGranted
                             : AuditEventType::ConsentDenied,
              Json{{"policy", decision.policy_label},
                   {"request_id", request.request_id},
                   {"verifier_did", request.verifier_did}});
  if (!decision.allow) {
    send_json(conn, "problem-report",
              Json{{"context", "proof-request"},
                   {"reason", "ConsentDenied"},
                   {"request_id", request.request_id}});
    return;
  }
  CandidateSelection selection = select_credentials(wallet_.issued_list(), request);
  if (!selection.satisfiable) {
    send_json(conn, "problem-report",
              Json{{"context", "proof-request"},
                   {"missing", selection.missing},
                   {"reason", "Unsatisfiable"},
                   {"request_id", request.request_id}});
    return;
  }
  std::size_t choice = selection.default_option;
  if (selection_chooser_)
    choice = selection_chooser_(selection, wallet_.issued_list());
  const SelectionOption& opt = selection.options.at(choice);

  std::vector<PresentationSource> sources;
  std::map<std::size_t, std::uint32_t> source_index;  // wallet idx -> source idx
  for (std::size_t wallet_idx : opt.credentials_used) {
    source_index[wallet_idx] = static_cast<std::uint32_t>(sources.size());
    const StoredCredential& sc = wallet_.credentials()[wallet_idx];
    sources.push_back(PresentationSource{sc.credential, sc.blinding});
  }
  std::map<std::string, AttributeSource> mapping;
  for (const auto& [name, wallet_idx] : opt.attr_to_credential)
    mapping[name] = AttributeSource{source_index.at(wallet_idx), name};

  Presentation pres =
      create_presentation(*params_, request, sources, mapping,
                          wallet_.link_secret(), /*consent=*/true, rng_);
  send_json(conn, "presentation", presentation_to_json(*params_, pres));
}

void Agent::handle_presentation(const Did& conn, const Json& payload) {
  Presentation pres = presentation_from_json(*params_, payload);
  auto it = outstanding_.find(pres.request_id);
  if (it == outstanding_.end()) {
    problems_[pres.request_id] = "UnknownRequest";
    send_json(conn, "problem-report",
              Json{{"context", "presentation"},
                   {"reason", "UnknownRequest"},
                   {"request_id", pres.request_id}});
    return;
  }
  VerificationResult result = verify_presentation(*params_, *registry_, it->second,
                                                  pres, nonces_, clock_->now());
  results_[pres.request_id] = result;
  Json credential_ids = Json::array();
  for (const auto& pc : pres.credentials)
    credential_ids.push_back(pc.body.credential_id);
  audit_event(AuditEventType::Verified, Json{{"accepted", result.accepted},
                                             {"credential_ids", credential_ids},
                                             {"request_id", pres.request_id}});
  send_json(conn, "ack",
            Json{{"accepted", result.accepted},
                 {"context", "presentation"},
                 {"request_id", pres.request_id}});
}

void Agent::handle_problem(const Did& conn, const Json& payload) {
  (void)conn;
  std::string key;
  if (payload.contains("request_id"))
    key = payload.at("request_id").get<std::string>();
  else if (payload.contains("credential_id"))
    key = payload.at("credential_id").get<std::string>();
  else
    key = require_string(payload, "context");
  problems_[key] = require_string(payload, "reason");
}

void Agent::send_offer(const Did& conn_handle, const std::string& schema_id,
                       const std::map<std::string, std::string>& values) {
  CredentialOffer offer =
      make_offer(*registry_, public_did(), schema_id, values, rng_);
  offers_out_[conn_handle] = offer;
  send_json(conn_handle, "credential-offer", offer_to_json(offer));
}

std::uint64_t Agent::revoke_credential(const std::string& credential_id,
                                       const std::string& reason) {
  if (!issued_ids_.count(credential_id))
    throw ProtocolError(ErrorCode::UnknownCredential,
                        "this issuer never issued " + credential_id);
  RevocationList current = registry_->revocation_of(public_did());
  if (current.revoked_ids.count(credential_id)) return current.version;
  RevocationList next;
  next.issuer_did = public_did();
  next.revoked_ids = current.revoked_ids;
  next.revoked_ids.insert(credential_id);
  next.version = current.version + 1;
  SchnorrSignature sig = sign(*params_, public_keypair().sk,
                              revocation_signing_bytes(*params_, next), rng_);
  std::uint64_t seq = registry_->publish_revocation(next, sig);
  audit_event(AuditEventType::Revoked, Json{{"credential_id", credential_id},
                                            {"reason", reason},
                                            {"sequence", seq},
                                            {"version", next.version}});
  return next.version;
}

std::string Agent::send_proof_request(
    const Did& conn_handle, const std::vector<RequestedAttribute>& requested) {
  ProofRequest request = create_proof_request(
      actor_did(), requested, clock_->now() + kDefaultRequestExpirySeconds,
      nonces_, rng_);
  outstanding_[request.request_id] = request;
  send_json(conn_handle, "proof-request", proof_request_to_json(request));
  return request.request_id;
}

std::optional<VerificationResult> Agent::verification_result(
    const std::string& request_id) const {
  auto it = results_.find(request_id);
  if (it == results_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Agent::problem_report(const std::string& request_id) const {
  auto it = problems_.find(request_id);
  if (it == problems_.end()) return std::nullopt;
  return it->second;
}

}  // namespace cpx
