#include "cpx/presentation.hpp"

#include <algorithm>

#include "cpx/errors.hpp"

namespace cpx {

namespace {

constexpr std::size_t kNonceLen = 16;

std::string nonce_key(const Bytes& nonce) { return hex_encode(nonce); }

bool credential_matches(const IssuedCredential& cred, const RequestedAttribute& req) {
  if (!cred.values.count(req.name)) return false;
  if (req.restriction.schema_id && cred.body.schema_id != *req.restriction.schema_id)
    return false;
  if (req.restriction.issuer_did && cred.body.issuer_did != *req.restriction.issuer_did)
    return false;
  return true;
}

/// Newest issued_at among the credentials an option uses; ISO-8601 strings
/// compare chronologically.
std::string newest_issued(const std::vector<IssuedCredential>& wallet,
                          const SelectionOption& opt) {
  std::string newest;
  for (std::size_t idx : opt.credentials_used)
    newest = std::max(newest, wallet[idx].body.issued_at);
  return newest;
}

}  // namespace

Json proof_request_to_json(const ProofRequest& req) {
  Json requested = Json::array();
  for (const auto& r : req.requested) {
    Json restriction = Json::object();
    if (r.restriction.schema_id) restriction["schema_id"] = *r.restriction.schema_id;
    if (r.restriction.issuer_did) restriction["issuer_did"] = *r.restriction.issuer_did;
    requested.push_back(Json{{"name", r.name}, {"restriction", restriction}});
  }
  Json j{{"nonce", bytes_to_json(req.nonce)},
         {"request_id", req.request_id},
         {"requested", requested},
         {"verifier_did", req.verifier_did}};
  if (req.expiry) j["expiry"] = *req.expiry;
  return j;
}

ProofRequest proof_request_from_json(const Json& j) {
  ProofRequest req;
  req.request_id = require_string(j, "request_id");
  req.verifier_did = require_string(j, "verifier_did");
  req.nonce = bytes_from_json(require_field(j, "nonce"));
  const Json& requested = require_field(j, "requested");
  if (!requested.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "requested must be an array");
  for (const auto& r : requested) {
    RequestedAttribute attr;
    attr.name = require_string(r, "name");
    const Json& restriction = require_field(r, "restriction");
    if (restriction.contains("schema_id"))
      attr.restriction.schema_id = require_string(restriction, "schema_id");
    if (restriction.contains("issuer_did"))
      attr.restriction.issuer_did = require_string(restriction, "issuer_did");
    req.requested.push_back(std::move(attr));
  }
  if (j.contains("expiry")) req.expiry = require_int(j, "expiry");
  return req;
}

Json presentation_to_json(const GroupParams& params, const Presentation& pres) {
  Json credentials = Json::array();
  for (const auto& pc : pres.credentials) {
    Json disclosed = Json::array();
    for (const auto& d : pc.disclosed)
      disclosed.push_back(Json{{"name", d.name},
                               {"salt", bytes_to_json(d.salt)},
                               {"value", d.value}});
    credentials.push_back(Json{{"body", body_to_json(params, pc.body)},
                               {"disclosed", disclosed},
                               {"issuer_signature",
                                sig_to_json(params, pc.issuer_signature)}});
  }
  Json mapping = Json::object();
  for (const auto& [name, src] : pres.mapping)
    mapping[name] =
        Json{{"attribute", src.attribute}, {"credential_index", src.credential_index}};
  return Json{{"credentials", credentials},
              {"link_proof", proof_to_json(params, pres.link_proof)},
              {"mapping", mapping},
              {"request_id", pres.request_id}};
}

Presentation presentation_from_json(const GroupParams& params, const Json& j) {
  Presentation pres;
  pres.request_id = require_string(j, "request_id");
  const Json& credentials = require_field(j, "credentials");
  if (!credentials.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "credentials must be an array");
  for (const auto& c : credentials) {
    PresentedCredential pc;
    pc.body = body_from_json(params, require_field(c, "body"));
    pc.issuer_signature = sig_from_json(params, require_field(c, "issuer_signature"));
    const Json& disclosed = require_field(c, "disclosed");
    if (!disclosed.is_array())
      throw ProtocolError(ErrorCode::ValidationError, "disclosed must be an array");
    for (const auto& d : disclosed) {
      DisclosedAttribute attr;
      attr.name = require_string(d, "name");
      attr.value = require_string(d, "value");
      attr.salt = bytes_from_json(require_field(d, "salt"));
      pc.disclosed.push_back(std::move(attr));
    }
    pres.credentials.push_back(std::move(pc));
  }
  pres.link_proof = proof_from_json(params, require_field(j, "link_proof"));
  const Json& mapping = require_field(j, "mapping");
  if (!mapping.is_object())
    throw ProtocolError(ErrorCode::ValidationError, "mapping must be an object");
  for (const auto& [name, src] : mapping.items()) {
    AttributeSource s;
    s.credential_index = static_cast<std::uint32_t>(require_uint(src, "credential_index"));
    s.attribute = require_string(src, "attribute");
    pres.mapping[name] = s;
  }
  return pres;
}

Json verification_result_to_json(const VerificationResult& result) {
  return Json{{"accepted", result.accepted},
              {"checks", result.checks},
              {"disclosed_values", result.disclosed_values}};
}

void NonceTable::record(const Bytes& nonce) { known_.insert(nonce_key(nonce)); }
bool NonceTable::known(const Bytes& nonce) const {
  return known_.count(nonce_key(nonce)) > 0;
}
bool NonceTable::used(const Bytes& nonce) const {
  return used_.count(nonce_key(nonce)) > 0;
}
void NonceTable::mark_used(const Bytes& nonce) { used_.insert(nonce_key(nonce)); }

Json NonceTable::to_json() const {
  Json j;
  j["known"] = Json::array();
  for (const auto& k : known_) j["known"].push_back(k);
  j["used"] = Json::array();
  for (const auto& u : used_) j["used"].push_back(u);
  return j;
}

NonceTable NonceTable::from_json(const Json& j) {
  NonceTable table;
  const Json& known = require_field(j, "known");
  const Json& used = require_field(j, "used");
  if (!known.is_array() || !used.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "nonce table fields must be arrays");
  for (const auto& k : known) table.known_.insert(k.get<std::string>());
  for (const auto& u : used) table.used_.insert(u.get<std::string>());
  return table;
}

ProofRequest create_proof_request(const Did& verifier_did,
                                  const std::vector<RequestedAttribute>& requested,
                                  std::optional<std::int64_t> expiry,
                                  NonceTable& nonces, SeededRng& rng) {
  if (requested.empty())
    throw ProtocolError(ErrorCode::EmptyRequest, "a proof request needs attributes");
  std::set<std::string> names;
  for (const auto& r : requested)
    if (!names.insert(r.name).second)
      throw ProtocolError(ErrorCode::ValidationError,
                          "duplicate requested attribute: " + r.name);
  ProofRequest req;
  req.request_id = hex_encode(rng.bytes(16));
  req.verifier_did = verifier_did;
  req.nonce = rng.bytes(kNonceLen);
  req.requested = requested;
  req.expiry = expiry;
  nonces.record(req.nonce);
  return req;
}

CandidateSelection select_credentials(const std::vector<IssuedCredential>& wallet,
                                      const ProofRequest& request) {
  CandidateSelection result;
  std::vector<std::vector<std::size_t>> candidates;
  for (const auto& req : request.requested) {
    std::vector<std::size_t> matches;
    for (std::size_t i = 0; i < wallet.size(); ++i)
      if (credential_matches(wallet[i], req)) matches.push_back(i);
    if (matches.empty()) result.missing.push_back(req.name);
    candidates.push_back(std::move(matches));
  }
  if (!result.missing.empty()) {
    result.satisfiable = false;
    return result;
  }

  // Enumerate every satisfying assignment (wallets are small).
  std::vector<std::size_t> cursor(candidates.size(), 0);
  for (;;) {
    SelectionOption opt;
    for (std::size_t a = 0; a < candidates.size(); ++a) {
      std::size_t idx = candidates[a][cursor[a]];
      opt.attr_to_credential[request.requested[a].name] = idx;
      opt.credentials_used.push_back(idx);
    }
    std::sort(opt.credentials_used.begin(), opt.credentials_used.end());
    opt.credentials_used.erase(
        std::unique(opt.credentials_used.begin(), opt.credentials_used.end()),
        opt.credentials_used.end());
    result.options.push_back(std::move(opt));

    std::size_t a = 0;
    while (a < cursor.size() && ++cursor[a] == candidates[a].size()) {
      cursor[a] = 0;
      ++a;
    }
    if (a == cursor.size()) break;
  }

  result.satisfiable = true;
  result.default_option = 0;
  for (std::size_t i = 1; i < result.options.size(); ++i) {
    const SelectionOption& best = result.options[result.default_option];
    const SelectionOption& cand = result.options[i];
    if (cand.credentials_used.size() != best.credentials_used.size()) {
      if (cand.credentials_used.size() < best.credentials_used.size())
        result.default_option = i;
      continue;
    }
    std::string cand_newest = newest_issued(wallet, cand);
    std::string best_newest = newest_issued(wallet, best);
    if (cand_newest > best_newest) result.default_option = i;
  }
  return result;
}

Presentation create_presentation(const GroupParams& params,
                                 const ProofRequest& request,
                                 const std::vector<PresentationSource>& sources,
                                 const std::map<std::string, AttributeSource>& mapping,
                                 const LinkSecret& secret, bool consent,
                                 SeededRng& rng) {
  if (!consent)
    throw ProtocolError(ErrorCode::ConsentMissing,
                        "holder consent is required to present");

  // The mapping must cover the requested attributes exactly, point at valid
  // sources, satisfy every restriction, and leave no source unused.
  if (mapping.size() != request.requested.size())
    throw ProtocolError(ErrorCode::SelectionInvalid,
                        "mapping does not cover the request exactly");
  std::vector<bool> used(sources.size(), false);
  for (const auto& req : request.requested) {
    auto it = mapping.find(req.name);
    if (it == mapping.end())
      throw ProtocolError(ErrorCode::SelectionInvalid,
                          "no source for attribute: " + req.name);
    const AttributeSource& src = it->second;
    if (src.credential_index >= sources.size() || src.attribute != req.name)
      throw ProtocolError(ErrorCode::SelectionInvalid,
                          "bad source for attribute: " + req.name);
    const IssuedCredential& cred = sources[src.credential_index].credential;
    if (!cred.values.count(req.name) || !cred.salts.count(req.name))
      throw ProtocolError(ErrorCode::SelectionInvalid,
                          "credential lacks attribute: " + req.name);
    if (req.restriction.schema_id && cred.body.schema_id != *req.restriction.schema_id)
      throw ProtocolError(ErrorCode::SelectionInvalid,
                          "schema restriction not met for: " + req.name);
    if (req.restriction.issuer_did &&
        cred.body.issuer_did != *req.restriction.issuer_did)
      throw ProtocolError(ErrorCode::SelectionInvalid,
                          "issuer restriction not met for: " + req.name);
    used[src.credential_index] = true;
  }
  for (std::size_t i = 0; i < sources.size(); ++i)
    if (!used[i])
      throw ProtocolError(ErrorCode::SelectionInvalid,
                          "presentation includes an unused credential");

  Presentation pres;
  pres.request_id = request.request_id;
  pres.mapping = mapping;
  for (const auto& source : sources) {
    PresentedCredential pc;
    pc.body = source.credential.body;
    pc.issuer_signature = source.credential.signature;
    pres.credentials.push_back(std::move(pc));
  }
  // Disclose exactly the requested attributes, nothing more.
  for (const auto& req : request.requested) {
    const AttributeSource& src = mapping.at(req.name);
    const IssuedCredential& cred = sources[src.credential_index].credential;
    DisclosedAttribute d;
    d.name = req.name;
    d.value = cred.values.at(req.name);
    d.salt = cred.salts.at(req.name);
    pres.credentials[src.credential_index].disclosed.push_back(std::move(d));
  }

  std::vector<mpz_class> commitments;
  std::vector<mpz_class> blindings;
  for (const auto& source : sources) {
    commitments.push_back(source.credential.body.link_commitment);
    blindings.push_back(source.blinding);
  }
  pres.link_proof = prove_equal_secret(params, commitments, secret.s, blindings,
                                       request.nonce, rng);
  return pres;
}

VerificationResult verify_presentation(const GroupParams& params,
                                       const Registry& registry,
                                       const ProofRequest& request,
                                       const Presentation& presentation,
                                       NonceTable& nonces, std::int64_t now) {
  if (!nonces.known(request.nonce))
    throw ProtocolError(ErrorCode::UnknownRequest,
                        "request nonce was never issued by this verifier");

  VerificationResult result;
  auto& checks = result.checks;
  checks["signature"] = true;
  checks["digest"] = true;
  checks["restriction"] = true;
  checks["link"] = true;
  checks["nonce"] = true;
  checks["revocation"] = true;
  checks["expiry"] = true;

  // signature: every issuer key resolved from the registry (primary source)
  // and every body signature valid under it.
  for (const auto& pc : presentation.credentials) {
    try {
      DidDocument doc = registry.resolve(pc.body.issuer_did);
      if (!verify_sig(params, doc.verification_key,
                      credential_body_signing_bytes(params, pc.body),
                      pc.issuer_signature))
        checks["signature"] = false;
    } catch (const ProtocolError&) {
      checks["signature"] = false;
    }
  }

  // digest: each disclosed triple recomputes to the digest at its schema slot.
  for (const auto& pc : presentation.credentials) {
    CredentialSchema schema;
    try {
      schema = registry.resolve_schema(pc.body.schema_id);
    } catch (const ProtocolError&) {
      checks["digest"] = false;
      continue;
    }
    if (pc.body.digests.size() != schema.attribute_names.size()) {
      checks["digest"] = false;
      continue;
    }
    for (const auto& d : pc.disclosed) {
      auto pos = std::find(schema.attribute_names.begin(),
                           schema.attribute_names.end(), d.name);
      if (pos == schema.attribute_names.end() || d.salt.size() != kSaltLen) {
        checks["digest"] = false;
        continue;
      }
      std::size_t idx =
          static_cast<std::size_t>(pos - schema.attribute_names.begin());
      if (recompute_salted_digest(d.salt, d.name, d.value) != pc.body.digests[idx])
        checks["digest"] = false;
    }
  }

  // restriction: the disclosed set equals the requested set exactly, every
  // source satisfies its schema/issuer restriction, and no credential rides
  // along without disclosing anything.
  {
    std::size_t disclosed_total = 0;
    for (const auto& pc : presentation.credentials) {
      if (pc.disclosed.empty()) checks["restriction"] = false;
      disclosed_total += pc.disclosed.size();
    }
    if (presentation.mapping.size() != request.requested.size() ||
        disclosed_total != request.requested.size())
      checks["restriction"] = false;
    for (const auto& req : request.requested) {
      auto it = presentation.mapping.find(req.name);
      if (it == presentation.mapping.end()) {
        checks["restriction"] = false;
        continue;
      }
      const AttributeSource& src = it->second;
      if (src.credential_index >= presentation.credentials.size() ||
          src.attribute != req.name) {
        checks["restriction"] = false;
        continue;
      }
      const PresentedCredential& pc = presentation.credentials[src.credential_index];
      bool found = false;
      for (const auto& d : pc.disclosed)
        if (d.name == req.name) found = true;
      if (!found) checks["restriction"] = false;
      if (req.restriction.schema_id && pc.body.schema_id != *req.restriction.schema_id)
        checks["restriction"] = false;
      if (req.restriction.issuer_did &&
          pc.body.issuer_did != *req.restriction.issuer_did)
        checks["restriction"] = false;
    }
  }

  // link: one secret opens every included link commitment, bound to the
  // request nonce (holder binding + secure delivery).
  {
    std::vector<mpz_class> commitments;
    for (const auto& pc : presentation.credentials)
      commitments.push_back(pc.body.link_commitment);
    if (commitments.empty()) {
      checks["link"] = false;
    } else {
      try {
        checks["link"] = verify_equal_secret(params, commitments,
                                             presentation.link_proof, request.nonce);
      } catch (const ProtocolError&) {
        checks["link"] = false;
      }
    }
  }

  // nonce: right request, not yet consumed.
  if (presentation.request_id != request.request_id) checks["nonce"] = false;
  if (nonces.used(request.nonce)) checks["nonce"] = false;

  // revocation: current registry state for every included credential.
  for (const auto& pc : presentation.credentials)
    if (registry.is_revoked(pc.body.issuer_did, pc.body.credential_id))
      checks["revocation"] = false;

  // expiry: requests go stale after their deadline.
  if (request.expiry && now > *request.expiry) checks["expiry"] = false;

  result.accepted = true;
  for (const auto& [name, ok] : checks)
    if (!ok) result.accepted = false;

  if (result.accepted) {
    nonces.mark_used(request.nonce);
    for (const auto& [name, src] : presentation.mapping) {
      const PresentedCredential& pc = presentation.credentials[src.credential_index];
      for (const auto& d : pc.disclosed)
        if (d.name == name) result.disclosed_values[name] = d.value;
    }
  }
  return result;
}

}  // namespace cpx
