#include "cpx/principles.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "cpx/errors.hpp"
#include "cpx/flows.hpp"
#include "cpx/presentation.hpp"

namespace cpx {

namespace {

struct CheckOutcome {
  bool pass = false;
  std::string evidence;
};

std::string decode_payload_request_id(const Json& envelope) {
  Bytes payload = bytes_from_json(envelope.at("payload"));
  Json decoded = Json::parse(
      std::string(reinterpret_cast<const char*>(payload.data()), payload.size()),
      nullptr, /*allow_exceptions=*/false);
  if (decoded.is_discarded()) return "";
  return decoded.value("request_id", "");
}

/// Assemble and verify a presentation directly against the live wallet and
/// registry, choosing a specific selection option.  Shared by the Control
/// and Persistence checks.
struct DirectProveResult {
  bool accepted = false;
  std::string presented_credential_id;
  std::string detail;
};

DirectProveResult direct_prove(Ecosystem& eco,
                               const std::vector<RequestedAttribute>& requested,
                               std::optional<std::size_t> option_override,
                               SeededRng& rng) {
  DirectProveResult out;
  const GroupParams& params = eco.params();
  Wallet& wallet = eco.holder().wallet();

  NonceTable nonces;
  ProofRequest request = create_proof_request(
      "did:cpx:local:principles-check", requested,
      eco.clock().now() + kDefaultRequestExpirySeconds, nonces, rng);

  CandidateSelection selection = select_credentials(wallet.issued_list(), request);
  if (!selection.satisfiable) {
    out.detail = "request unsatisfiable";
    return out;
  }
  std::size_t pick = option_override.value_or(selection.default_option);
  if (pick >= selection.options.size()) {
    out.detail = "option index out of range";
    return out;
  }
  const SelectionOption& option = selection.options[pick];

  std::vector<PresentationSource> sources;
  std::map<std::size_t, std::uint32_t> source_index;
  for (std::size_t wallet_idx : option.credentials_used) {
    const StoredCredential& sc = wallet.credentials()[wallet_idx];
    source_index[wallet_idx] = static_cast<std::uint32_t>(sources.size());
    sources.push_back(PresentationSource{sc.credential, sc.blinding});
  }
  std::map<std::string, AttributeSource> mapping;
  for (const auto& [name, wallet_idx] : option.attr_to_credential)
    mapping[name] = AttributeSource{source_index[wallet_idx], name};

  Presentation pres = create_presentation(params, request, sources, mapping,
                                          wallet.link_secret(), /*consent=*/true, rng);
  VerificationResult result = verify_presentation(params, eco.registry(), request,
                                                  pres, nonces, eco.clock().now());
  out.accepted = result.accepted;
  if (!pres.credentials.empty())
    out.presented_credential_id = pres.credentials[0].body.credential_id;
  if (!result.accepted) {
    for (const auto& [name, ok] : result.checks)
      if (!ok) {
        out.detail = "check failed: " + name;
        break;
      }
  }
  return out;
}

CheckOutcome check_protection(Ecosystem& eco) {
  const GroupParams& params = eco.params();
  const auto& creds = eco.holder().wallet().credentials();
  if (creds.empty()) return {false, "no stored credentials to fuzz"};
  const IssuedCredential& cred = creds.front().credential;

  mpz_class issuer_pk;
  try {
    issuer_pk = eco.registry().resolve(cred.body.issuer_did).verification_key;
  } catch (const ProtocolError& e) {
    return {false, std::string("issuer unresolvable: ") + e.what()};
  }
  Bytes signed_bytes = credential_body_signing_bytes(params, cred.body);
  if (!verify_sig(params, issuer_pk, signed_bytes, cred.signature))
    return {false, "credential fails verification before mutation"};

  SeededRng rng(eco.seed() ^ 0x70726f74656374ULL);
  const int trials = 64;
  int rejected = 0;
  for (int i = 0; i < trials; ++i) {
    Bytes mutated = signed_bytes;
    std::size_t pos = static_cast<std::size_t>(rng.next_u64() % mutated.size());
    mutated[pos] ^= static_cast<std::uint8_t>(1 + rng.next_u64() % 255);
    if (!verify_sig(params, issuer_pk, mutated, cred.signature)) ++rejected;
  }
  std::ostringstream ev;
  ev << rejected << "/" << trials
     << " single-byte mutations rejected (credential " << cred.body.credential_id
     << ")";
  // A tampered body can re-verify in the toy group whenever the 101-value
  // challenge collides (about 1 in 101 mutations), so tolerate that rate
  // there; the production group admits no survivors at all.
  const int required = params.profile() == "toy" ? trials - 8 : trials;
  return {rejected >= required, ev.str()};
}

CheckOutcome check_control(Ecosystem& eco) {
  Wallet& wallet = eco.holder().wallet();
  if (wallet.credentials().empty()) return {false, "wallet empty"};

  std::vector<RequestedAttribute> requested{RequestedAttribute{"full_name", {}}};
  ProofRequest probe;
  probe.request_id = "control-probe";
  probe.verifier_did = "did:cpx:local:principles-check";
  probe.requested = requested;
  CandidateSelection selection = select_credentials(wallet.issued_list(), probe);
  if (!selection.satisfiable) return {false, "no credential carries full_name"};

  SeededRng rng(eco.seed() ^ 0x636f6e74726f6cULL);
  std::size_t pick = selection.default_option;
  if (selection.options.size() > 1)
    pick = (selection.default_option + 1) % selection.options.size();

  std::size_t chosen_wallet_idx = selection.options[pick].attr_to_credential.at("full_name");
  const std::string expected_id =
      wallet.credentials()[chosen_wallet_idx].credential.body.credential_id;

  DirectProveResult res = direct_prove(eco, requested, pick, rng);
  if (!res.accepted) return {false, "override presentation rejected: " + res.detail};
  if (res.presented_credential_id != expected_id)
    return {false, "override ignored: presented " + res.presented_credential_id +
                       " instead of " + expected_id};
  std::ostringstream ev;
  ev << "holder-chosen option " << pick << " of " << selection.options.size()
     << " presented and accepted (credential " << expected_id << ")";
  return {true, ev.str()};
}

CheckOutcome check_consent(const RunTrace& trace) {
  std::set<std::string> allowed;
  if (trace.wallet_inventory.contains("consent_log"))
    for (const auto& e : trace.wallet_inventory.at("consent_log"))
      if (e.value("decision", "") == "allow")
        allowed.insert(e.value("request_id", ""));

  std::size_t presentations = 0;
  for (std::size_t i = 0; i < trace.proof_rounds.size(); ++i) {
    const auto& round = trace.proof_rounds[i];
    std::string rid = round.presentation.is_object()
                          ? round.presentation.value("request_id", "")
                          : "";
    if (rid.empty()) continue;
    ++presentations;
    if (!allowed.count(rid))
      return {false, "presentation " + rid + " lacks a consent entry (proof_rounds[" +
                         std::to_string(i) + "])"};
  }
  for (std::size_t i = 0; i < trace.messages.size(); ++i) {
    const Json& env = trace.messages[i];
    if (env.value("payload_type", "") != "presentation") continue;
    std::string rid = decode_payload_request_id(env);
    if (rid.empty()) continue;
    ++presentations;
    if (!allowed.count(rid))
      return {false, "presentation " + rid + " lacks a consent entry (messages[" +
                         std::to_string(i) + "])"};
  }
  std::ostringstream ev;
  ev << presentations << " recorded presentations, every one preceded by an allow entry";
  return {true, ev.str()};
}

CheckOutcome check_access(Ecosystem& eco) {
  const GroupParams& params = eco.params();
  Agent& doctor = eco.holder();
  const Wallet& wallet = doctor.wallet();
  Json inventory = wallet.list_all_data(params);

  if (!inventory.contains("link_secret") || inventory.at("link_secret").is_null())
    return {false, "inventory omits the link secret"};
  if (!inventory.contains("credentials") ||
      inventory.at("credentials").size() != wallet.credentials().size())
    return {false, "inventory credential count mismatch"};
  for (std::size_t i = 0; i < wallet.credentials().size(); ++i) {
    const auto& stored = wallet.credentials()[i].credential;
    const Json& entry = inventory.at("credentials").at(i).at("credential");
    const Json& values = entry.at("values");
    for (const auto& [name, value] : stored.values) {
      if (!values.contains(name) || values.at(name).get<std::string>() != value)
        return {false, "inventory omits attribute " + name + " of credential " +
                           stored.body.credential_id};
    }
  }
  if (!inventory.contains("consent_log") ||
      inventory.at("consent_log").size() != wallet.consent_log().size())
    return {false, "inventory consent log incomplete"};
  std::size_t live_connections = doctor.connections().connections().size();
  if (!inventory.contains("connections") ||
      inventory.at("connections").size() != live_connections)
    return {false, "inventory connection list incomplete"};

  std::ostringstream ev;
  ev << "inventory enumerates " << wallet.credentials().size() << " credentials, "
     << wallet.consent_log().size() << " consent entries, " << live_connections
     << " connections, and the link secret";
  return {true, ev.str()};
}

CheckOutcome check_minimalization(const RunTrace& trace) {
  if (trace.proof_rounds.empty()) return {true, "no presentations in trace"};
  for (std::size_t i = 0; i < trace.proof_rounds.size(); ++i) {
    const auto& round = trace.proof_rounds[i];
    if (!round.request.is_object() || !round.presentation.is_object())
      return {false, "proof_rounds[" + std::to_string(i) + "] is incomplete"};
    std::vector<std::string> requested;
    for (const auto& ra : round.request.at("requested"))
      requested.push_back(ra.at("name").get<std::string>());
    std::vector<std::string> disclosed;
    for (const auto& cred : round.presentation.at("credentials")) {
      const Json& list = cred.at("disclosed");
      if (list.empty())
        return {false, "proof_rounds[" + std::to_string(i) +
                           "] carries a credential disclosing nothing"};
      for (const auto& d : list) disclosed.push_back(d.at("name").get<std::string>());
    }
    std::sort(requested.begin(), requested.end());
    std::sort(disclosed.begin(), disclosed.end());
    if (requested != disclosed)
      return {false, "proof_rounds[" + std::to_string(i) +
                         "] disclosure differs from the requested set"};
  }
  std::ostringstream ev;
  ev << trace.proof_rounds.size()
     << " presentations disclose exactly the requested attributes";
  return {true, ev.str()};
}

CheckOutcome check_portability(Ecosystem& eco) {
  const GroupParams& params = eco.params();
  const Wallet& wallet = eco.holder().wallet();
  try {
    std::string exported = wallet.export_wallet(params);
    Wallet imported = Wallet::import_wallet(params, eco.registry(), exported);
    std::string re_exported = imported.export_wallet(params);
    if (re_exported != exported)
      return {false, "re-export differs from original export"};
    std::ostringstream ev;
    ev << "export/import round trip byte-identical (" << exported.size()
       << " bytes, " << wallet.credentials().size() << " credentials revalidated)";
    return {true, ev.str()};
  } catch (const ProtocolError& e) {
    return {false, std::string("round trip failed: ") + e.what()};
  }
}

CheckOutcome check_transparency(const RunTrace& trace, Ecosystem& eco) {
  ChainStatus live = eco.audit().verify_chain();
  if (!live.ok)
    return {false, "live audit chain broken at index " +
                       std::to_string(live.first_bad_index)};
  AuditLog imported = AuditLog::import_jsonl(trace.audit_jsonl);
  ChainStatus status = imported.verify_chain();
  if (!status.ok)
    return {false, "exported audit chain broken at index " +
                       std::to_string(status.first_bad_index)};
  std::ostringstream ev;
  ev << "hash chain verifies across " << imported.size() << " exported events";
  return {true, ev.str()};
}

CheckOutcome check_persistence(const RunTrace& trace, Ecosystem& eco) {
  Wallet& wallet = eco.holder().wallet();
  const StoredCredential* oldest = nullptr;
  for (const auto& m : trace.moments) {
    for (const auto& id : m.credential_ids) {
      const StoredCredential* sc = wallet.find_credential(id);
      if (!sc) continue;
      if (eco.registry().is_revoked(sc->credential.body.issuer_did, id)) continue;
      oldest = sc;
      break;
    }
    if (oldest) break;
  }
  if (!oldest) return {false, "no unrevoked credential from the trace to re-verify"};

  const CredentialBody& body = oldest->credential.body;
  CredentialSchema schema;
  try {
    schema = eco.registry().resolve_schema(body.schema_id);
  } catch (const ProtocolError& e) {
    return {false, std::string("schema unresolvable: ") + e.what()};
  }
  RequestedAttribute ra;
  ra.name = schema.attribute_names.front();
  ra.restriction.schema_id = body.schema_id;
  ra.restriction.issuer_did = body.issuer_did;

  SeededRng rng(eco.seed() ^ 0x7065727369737400ULL);
  DirectProveResult res = direct_prove(eco, {ra}, std::nullopt, rng);
  if (!res.accepted)
    return {false, "credential " + body.credential_id +
                       " no longer verifies: " + res.detail};
  std::ostringstream ev;
  ev << "credential " << body.credential_id << " issued " << body.issued_at
     << " still verifies at " << eco.clock().now_iso();
  return {true, ev.str()};
}

CheckOutcome check_autonomy(Ecosystem& eco) {
  if (eco.config().entities.empty()) return {false, "no peer to connect to"};
  Agent& doctor = eco.holder();
  Agent& peer = eco.agent(eco.config().entities.front().name);

  std::size_t entries_before = eco.registry().entries().size();
  auto res = flows::connect(doctor, peer, /*as_public=*/false, "web");
  std::size_t entries_after = eco.registry().entries().size();

  if (entries_after != entries_before)
    return {false, "registry grew while forming a pairwise connection"};
  const Connection& conn = doctor.connections().connection(res.inviter_handle);
  if (!is_peer_did(conn.my_peer_did) || !is_peer_did(conn.their_peer_did))
    return {false, "pairwise identifiers are not peer DIDs"};
  if (eco.registry().has_did(conn.my_peer_did) ||
      eco.registry().has_did(conn.their_peer_did))
    return {false, "a peer DID leaked onto the registry"};
  std::ostringstream ev;
  ev << "holder minted a new pairwise relationship with zero registry writes ("
     << entries_before << " entries before and after)";
  return {true, ev.str()};
}

struct PrincipleSpec {
  const char* name;
  const char* definition;
};

}  // namespace

bool PrinciplesReport::all_checked_pass() const {
  for (const auto& e : entries)
    if (e.machine_checkable && !e.pass) return false;
  return true;
}

Json PrinciplesReport::to_json() const {
  Json entries_j = Json::array();
  for (const auto& e : entries) {
    Json je;
    je["principle"] = e.principle;
    je["definition"] = e.definition;
    je["machine_checkable"] = e.machine_checkable;
    je["status"] = e.machine_checkable ? (e.pass ? "pass" : "fail")
                                       : "not-machine-checkable";
    je["check_id"] = e.check_id;
    je["pass"] = e.pass;
    je["evidence"] = e.evidence;
    entries_j.push_back(std::move(je));
  }
  return Json{{"entries", std::move(entries_j)}};
}

PrinciplesReport PrinciplesReport::from_json(const Json& j) {
  PrinciplesReport report;
  const Json& entries = require_field(j, "entries");
  if (!entries.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "entries must be an array");
  for (const auto& je : entries) {
    PrincipleResult r;
    r.principle = require_string(je, "principle");
    r.definition = require_string(je, "definition");
    r.machine_checkable = require_field(je, "machine_checkable").get<bool>();
    r.check_id = require_string(je, "check_id");
    r.pass = require_field(je, "pass").get<bool>();
    r.evidence = require_string(je, "evidence");
    report.entries.push_back(std::move(r));
  }
  return report;
}

std::string PrinciplesReport::render_table() const {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof(line), "%-22s %-22s %-24s %s\n", "principle", "status",
                "check", "evidence");
  out += line;
  out += std::string(110, '-') + "\n";
  for (const auto& e : entries) {
    std::string status = e.machine_checkable ? (e.pass ? "PASS" : "FAIL")
                                             : "not machine-checkable";
    std::string note = e.machine_checkable ? e.evidence : e.definition;
    std::snprintf(line, sizeof(line), "%-22s %-22s %-24s %s\n", e.principle.c_str(),
                  status.c_str(), e.check_id.c_str(), note.c_str());
    out += line;
  }
  return out;
}

PrinciplesReport run_principles_checks(const RunTrace& trace, Ecosystem& eco) {
  // Workshop-elicited priority puts protection, control & consent, and
  // interoperability at the head; the rest keep their catalogue order.
  static const PrincipleSpec kCatalogue[] = {
      {"Protection",
       "When user rights conflict with network needs, the system errs toward the "
       "user, and signed artifacts resist tampering."},
      {"Control", "The holder decides what to share and which credentials satisfy "
                  "a request."},
      {"Consent", "Personal data moves only after the holder agrees."},
      {"Interoperability",
       "Identities and credentials stay usable across organizational boundaries."},
      {"Existence",
       "A person's identity exists independently of any administrator or provider."},
      {"Autonomy", "Holders create and manage identifiers without anyone's "
                   "permission or registration."},
      {"Disclosure", "Holders can reveal selected attributes rather than whole "
                     "documents."},
      {"Ownership", "The holder owns their identity and the claims made about it."},
      {"Access", "Holders can enumerate every piece of data their own store keeps."},
      {"Single source", "The holder is the authoritative source of their identity "
                        "data."},
      {"Transparency", "System behavior is open to inspection by anyone."},
      {"Standard", "Identity rests on open, widely implemented formats."},
      {"Cost", "Participation costs stay minimal."},
      {"Portability", "Identity data and services move intact between systems."},
      {"Persistence", "Identities and credentials last as long as their owner "
                      "needs them."},
      {"Minimalization", "Each disclosure carries the least data needed for the "
                         "task."},
      {"Availability", "Owners can reach their identity whenever and wherever "
                       "they need it."},
      {"Human welfare", "The system serves human well-being first."},
      {"Non-maleficence", "The system avoids causing harm."},
      {"Justice", "The system avoids systematic unfairness."},
      {"Trustworthiness", "Participants can expect good-faith behavior."},
      {"Privacy", "The user sets the boundaries on what is shared."},
      {"Dignity", "The system upholds human dignity."},
      {"Solidarity", "Stakeholders cooperate respectfully."},
      {"Environmental welfare", "The system avoids environmental harm."},
  };

  PrinciplesReport report;
  for (const auto& spec : kCatalogue) {
    PrincipleResult r;
    r.principle = spec.name;
    r.definition = spec.definition;
    const std::string name = spec.name;
    CheckOutcome outcome;
    if (name == "Protection") {
      r.check_id = "tamper-fuzz";
      outcome = check_protection(eco);
    } else if (name == "Control") {
      r.check_id = "selection-override";
      outcome = check_control(eco);
    } else if (name == "Consent") {
      r.check_id = "consent-completeness";
      outcome = check_consent(trace);
    } else if (name == "Access") {
      r.check_id = "full-inventory";
      outcome = check_access(eco);
    } else if (name == "Minimalization") {
      r.check_id = "disclosed-equals-requested";
      outcome = check_minimalization(trace);
    } else if (name == "Portability") {
      r.check_id = "export-import-roundtrip";
      outcome = check_portability(eco);
    } else if (name == "Transparency") {
      r.check_id = "audit-chain-verifies";
      outcome = check_transparency(trace, eco);
    } else if (name == "Persistence") {
      r.check_id = "early-credential-longevity";
      outcome = check_persistence(trace, eco);
    } else if (name == "Autonomy") {
      r.check_id = "peer-did-offline";
      outcome = check_autonomy(eco);
    }
    if (!r.check_id.empty()) {
      r.machine_checkable = true;
      r.pass = outcome.pass;
      r.evidence = outcome.evidence;
    }
    report.entries.push_back(std::move(r));
  }
  return report;
}

}  // namespace cpx
