#include "cpx/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <utility>

#include "cpx/canonical.hpp"
#include "cpx/errors.hpp"
#include "cpx/flows.hpp"
#include "cpx/hash.hpp"

namespace cpx {

std::string moment_kind_name(MomentKind k) {
  switch (k) {
    case MomentKind::Graduation: return "graduation";
    case MomentKind::GmcRegistration: return "gmc_registration";
    case MomentKind::JobApplication: return "job_application";
    case MomentKind::JoinHospital: return "join_hospital";
    case MomentKind::Training: return "training";
    case MomentKind::Rotation: return "rotation";
    case MomentKind::RcpeAccreditation: return "rcpe_accreditation";
    case MomentKind::Qualification: return "qualification";
    case MomentKind::MoveAbroad: return "move_abroad";
    case MomentKind::AppraisalRevalidation: return "appraisal_revalidation";
  }
  return "unknown";
}

MomentKind moment_kind_from_name(const std::string& s) {
  static const std::map<std::string, MomentKind> kByName = {
      {"graduation", MomentKind::Graduation},
      {"gmc_registration", MomentKind::GmcRegistration},
      {"job_application", MomentKind::JobApplication},
      {"join_hospital", MomentKind::JoinHospital},
      {"training", MomentKind::Training},
      {"rotation", MomentKind::Rotation},
      {"rcpe_accreditation", MomentKind::RcpeAccreditation},
      {"qualification", MomentKind::Qualification},
      {"move_abroad", MomentKind::MoveAbroad},
      {"appraisal_revalidation", MomentKind::AppraisalRevalidation},
  };
  auto it = kByName.find(s);
  if (it == kByName.end())
    throw ProtocolError(ErrorCode::ValidationError, "unknown moment kind: " + s);
  return it->second;
}

// ---------------------------------------------------------------------------
// EcosystemConfig

EcosystemConfig EcosystemConfig::default_config(const std::string& profile) {
  EcosystemConfig cfg;
  cfg.profile = profile;
  cfg.holder_name = "doctor";
  cfg.holder_label = "Dr. Alex Doe";
  cfg.entities = {
      EntityConfig{"medical_school",
                   "Medical School",
                   AgentRole::Issuer,
                   {CredentialSchema{"medical_degree:1",
                                     {"full_name", "date_of_birth", "university",
                                      "degree", "graduation_date"}}}},
      EntityConfig{"gmc",
                   "General Medical Council",
                   AgentRole::Mixed,
                   {CredentialSchema{"gmc_license:1",
                                     {"full_name", "gmc_number", "license_status"}}}},
      EntityConfig{"rcpe",
                   "Royal College of Edinburgh",
                   AgentRole::Mixed,
                   {CredentialSchema{"accreditation:1",
                                     {"full_name", "programme", "stage"}},
                    CredentialSchema{"qualified_physician:1",
                                     {"full_name", "specialty", "qualified_on"}}}},
      EntityConfig{"edinburgh_hospital",
                   "Edinburgh Hospital",
                   AgentRole::Mixed,
                   {CredentialSchema{"identity_verification:1",
                                     {"full_name", "date_of_birth", "verified_on"}}}},
      EntityConfig{"glasgow_hospital",
                   "Glasgow Hospital",
                   AgentRole::Mixed,
                   {CredentialSchema{"employment:1",
                                     {"full_name", "role", "hospital", "start_date"}}}},
      EntityConfig{"hes",
                   "Health Education Scotland",
                   AgentRole::Mixed,
                   {CredentialSchema{"training_certificate:1",
                                     {"full_name", "course", "completion_date"}}}},
  };
  return cfg;
}

namespace {

std::string role_name_or(const Json& j, const char* key) {
  if (!j.contains(key)) return "mixed";
  return require_string(j, key);
}

AgentRole role_from_name(const std::string& s) {
  if (s == "holder") return AgentRole::Holder;
  if (s == "issuer") return AgentRole::Issuer;
  if (s == "verifier") return AgentRole::Verifier;
  if (s == "mixed") return AgentRole::Mixed;
  throw ProtocolError(ErrorCode::ValidationError, "unknown agent role: " + s);
}

}  // namespace

Json EcosystemConfig::to_json() const {
  Json entities_j = Json::array();
  for (const auto& e : entities) {
    Json schemas = Json::array();
    for (const auto& s : e.schemas) schemas.push_back(schema_to_json(s));
    Json je;
    je["name"] = e.name;
    je["label"] = e.label;
    je["role"] = agent_role_name(e.role);
    je["schemas"] = std::move(schemas);
    entities_j.push_back(std::move(je));
  }
  Json j;
  j["profile"] = profile;
  j["holder"] = Json{{"label", holder_label}, {"name", holder_name}};
  j["entities"] = std::move(entities_j);
  return j;
}

EcosystemConfig EcosystemConfig::from_json(const Json& j) {
  EcosystemConfig cfg;
  cfg.profile = require_string(j, "profile");
  const Json& holder = require_field(j, "holder");
  cfg.holder_name = require_string(holder, "name");
  cfg.holder_label = require_string(holder, "label");
  const Json& entities = require_field(j, "entities");
  if (!entities.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "entities must be an array");
  cfg.entities.clear();
  for (const auto& je : entities) {
    EntityConfig e;
    e.name = require_string(je, "name");
    e.label = require_string(je, "label");
    e.role = role_from_name(role_name_or(je, "role"));
    const Json& schemas = require_field(je, "schemas");
    if (!schemas.is_array())
      throw ProtocolError(ErrorCode::ValidationError, "schemas must be an array");
    for (const auto& js : schemas) e.schemas.push_back(schema_from_json(js));
    cfg.entities.push_back(std::move(e));
  }
  cfg.validate();
  return cfg;
}

void EcosystemConfig::validate() const {
  if (profile != "toy" && profile != "production")
    throw ProtocolError(ErrorCode::ConfigInvalid, "unknown group profile: " + profile);
  if (holder_name.empty())
    throw ProtocolError(ErrorCode::ConfigInvalid, "holder name must not be empty");
  std::set<std::string> names{holder_name};
  std::set<std::string> schema_ids;
  for (const auto& e : entities) {
    if (e.name.empty())
      throw ProtocolError(ErrorCode::ConfigInvalid, "entity name must not be empty");
    if (!names.insert(e.name).second)
      throw ProtocolError(ErrorCode::ConfigInvalid, "duplicate entity name: " + e.name);
    for (const auto& s : e.schemas) {
      if (!schema_ids.insert(s.schema_id).second)
        throw ProtocolError(ErrorCode::ConfigInvalid,
                            "schema issued by more than one entity: " + s.schema_id);
    }
  }
}

// ---------------------------------------------------------------------------
// ScenarioScript

ScenarioScript ScenarioScript::default_career() {
  ScenarioScript s;
  s.version = 1;
  s.name = "default-career";
  s.career_length_days = 3285;  // nine simulated years
  s.moments = {
      ScriptMoment{"graduation", MomentKind::Graduation, 0, {}, std::nullopt},
      ScriptMoment{"gmc-registration", MomentKind::GmcRegistration, 30, {}, std::nullopt},
      ScriptMoment{"join-hospital",
                   MomentKind::JoinHospital,
                   60,
                   {{"hospital", "edinburgh_hospital"}},
                   std::nullopt},
      ScriptMoment{"training",
                   MomentKind::Training,
                   200,
                   {{"course", "Advanced Life Support"}},
                   std::nullopt},
      ScriptMoment{"rotation",
                   MomentKind::Rotation,
                   240,
                   {{"hospital", "glasgow_hospital"},
                    {"verify_issuer", "edinburgh_hospital"}},
                   std::nullopt},
      ScriptMoment{"rcpe-accreditation",
                   MomentKind::RcpeAccreditation,
                   420,
                   {{"programme", "Internal Medicine Training"}, {"stage", "IMT1"}},
                   std::nullopt},
      ScriptMoment{"qualification",
                   MomentKind::Qualification,
                   2490,
                   {{"specialty", "General Internal Medicine"}},
                   std::nullopt},
      ScriptMoment{"appraisal-revalidation", MomentKind::AppraisalRevalidation, 1095,
                   {}, std::int64_t{1095}},
      ScriptMoment{"move-abroad", MomentKind::MoveAbroad, 3260, {}, std::nullopt},
  };
  return s;
}

Json ScenarioScript::to_json() const {
  Json moments_j = Json::array();
  for (const auto& m : moments) {
    Json jm;
    jm["moment_id"] = m.moment_id;
    jm["kind"] = moment_kind_name(m.kind);
    jm["day"] = m.day;
    if (!m.args.empty()) jm["args"] = m.args;
    if (m.recur_days) jm["recur_days"] = *m.recur_days;
    moments_j.push_back(std::move(jm));
  }
  Json j;
  j["version"] = version;
  j["name"] = name;
  j["career_length_days"] = career_length_days;
  j["moments"] = std::move(moments_j);
  return j;
}

ScenarioScript ScenarioScript::from_json(const Json& j) {
  ScenarioScript s;
  std::int64_t version = require_int(j, "version");
  if (version != 1)
    throw ProtocolError(ErrorCode::UnsupportedVersion,
                        "script version " + std::to_string(version));
  s.version = static_cast<int>(version);
  s.name = require_string(j, "name");
  s.career_length_days = require_int(j, "career_length_days");
  if (s.career_length_days < 0)
    throw ProtocolError(ErrorCode::ValidationError, "career_length_days must be >= 0");
  const Json& moments = require_field(j, "moments");
  if (!moments.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "moments must be an array");
  std::set<std::string> seen_ids;
  for (const auto& jm : moments) {
    ScriptMoment m;
    m.moment_id = require_string(jm, "moment_id");
    if (!seen_ids.insert(m.moment_id).second)
      throw ProtocolError(ErrorCode::ValidationError,
                          "duplicate moment_id: " + m.moment_id);
    m.kind = moment_kind_from_name(require_string(jm, "kind"));
    m.day = require_int(jm, "day");
    if (m.day < 0)
      throw ProtocolError(ErrorCode::ValidationError, "moment day must be >= 0");
    if (jm.contains("args")) {
      const Json& args = jm.at("args");
      if (!args.is_object())
        throw ProtocolError(ErrorCode::ValidationError, "args must be an object");
      for (auto it = args.begin(); it != args.end(); ++it) {
        if (!it.value().is_string())
          throw ProtocolError(ErrorCode::ValidationError, "args values must be strings");
        m.args[it.key()] = it.value().get<std::string>();
      }
    }
    if (jm.contains("recur_days")) {
      std::int64_t r = require_int(jm, "recur_days");
      if (r <= 0)
        throw ProtocolError(ErrorCode::ValidationError, "recur_days must be > 0");
      m.recur_days = r;
    }
    s.moments.push_back(std::move(m));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Ecosystem

namespace {

const GroupParams& params_for(const EcosystemConfig& cfg) {
  cfg.validate();
  return GroupParams::by_name(cfg.profile);
}

std::uint64_t agent_seed(std::uint64_t run_seed, const std::string& name) {
  CanonicalWriter w;
  w.str("cpx:agent-seed:v1").u64(run_seed).str(name);
  Hash32 d = sha256(w.out());
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | d[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

Ecosystem::Ecosystem(EcosystemConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      seed_(seed),
      params_(&params_for(config_)),
      registry_(*params_),
      bus_(),
      audit_(),
      clock_() {
  for (const auto& e : config_.entities) {
    AgentConfig ac{e.name, e.label, e.role};
    auto agent = std::make_unique<Agent>(*params_, registry_, bus_, audit_, clock_,
                                         ac, agent_seed(seed_, e.name));
    agent->register_public_did();
    for (const auto& s : e.schemas) agent->publish_schema(s);
    agents_.emplace(e.name, std::move(agent));
  }
  AgentConfig hc{config_.holder_name, config_.holder_label, AgentRole::Holder};
  agents_.emplace(config_.holder_name,
                  std::make_unique<Agent>(*params_, registry_, bus_, audit_, clock_,
                                          hc, agent_seed(seed_, config_.holder_name)));
}

Agent& Ecosystem::agent(const std::string& name) {
  auto it = agents_.find(name);
  if (it == agents_.end())
    throw ProtocolError(ErrorCode::NotFound, "no such agent: " + name);
  return *it->second;
}

std::optional<std::string> Ecosystem::schema_owner(const std::string& schema_id) const {
  for (const auto& e : config_.entities)
    for (const auto& s : e.schemas)
      if (s.schema_id == schema_id) return e.name;
  return std::nullopt;
}

std::unique_ptr<Ecosystem> setup_ecosystem(const EcosystemConfig& config,
                                           std::uint64_t seed) {
  return std::make_unique<Ecosystem>(config, seed);
}

// ---------------------------------------------------------------------------
// RunTrace

Json RunTrace::summary_json() const {
  Json moments_j = Json::array();
  for (const auto& m : moments) {
    Json jm;
    jm["moment_id"] = m.moment_id;
    jm["kind"] = moment_kind_name(m.kind);
    jm["day"] = m.day;
    jm["occurrences"] = m.occurrences;
    jm["interactions"] = m.interactions;
    jm["credential_ids"] = m.credential_ids;
    jm["request_ids"] = m.request_ids;
    moments_j.push_back(std::move(jm));
  }
  Json j;
  j["script_name"] = script_name;
  j["script_version"] = script_version;
  j["seed"] = seed;
  j["profile"] = profile;
  j["career_length_days"] = career_length_days;
  j["total_interactions"] = total_interactions;
  j["moments"] = std::move(moments_j);
  return j;
}

RunTrace RunTrace::from_summary_json(const Json& j) {
  RunTrace t;
  t.script_name = require_string(j, "script_name");
  t.script_version = static_cast<int>(require_int(j, "script_version"));
  t.seed = require_uint(j, "seed");
  t.profile = require_string(j, "profile");
  t.career_length_days = require_int(j, "career_length_days");
  t.total_interactions = static_cast<int>(require_int(j, "total_interactions"));
  const Json& moments = require_field(j, "moments");
  if (!moments.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "moments must be an array");
  for (const auto& jm : moments) {
    MomentResult m;
    m.moment_id = require_string(jm, "moment_id");
    m.kind = moment_kind_from_name(require_string(jm, "kind"));
    m.day = require_int(jm, "day");
    m.occurrences = static_cast<int>(require_int(jm, "occurrences"));
    m.interactions = static_cast<int>(require_int(jm, "interactions"));
    const Json& creds = require_field(jm, "credential_ids");
    for (const auto& c : creds) m.credential_ids.push_back(c.get<std::string>());
    const Json& reqs = require_field(jm, "request_ids");
    for (const auto& r : reqs) m.request_ids.push_back(r.get<std::string>());
    t.moments.push_back(std::move(m));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Script execution

namespace {

/// Drives one script over a live ecosystem: owns the per-moment bookkeeping,
/// the entity connection table, and the interaction/clock accounting.
class Engine {
 public:
  Engine(Ecosystem& eco, RunTrace& trace, double minutes_per_interaction)
      : eco_(eco), trace_(trace), minutes_(minutes_per_interaction) {}

  void run_moment(const ScriptMoment& sm, std::int64_t career_length_days) {
    if (sm.recur_days && *sm.recur_days <= 0)
      throw ProtocolError(ErrorCode::ValidationError, "recur_days must be > 0");
    MomentResult res;
    res.moment_id = sm.moment_id;
    res.kind = sm.kind;
    res.day = sm.day;
    res.occurrences = 0;
    current_ = &res;
    for (std::int64_t day = sm.day; day <= career_length_days;
         day += sm.recur_days.value_or(0)) {
      eco_.clock().advance_to_day(day);
      dispatch(sm);
      res.occurrences += 1;
      if (!sm.recur_days) break;
    }
    current_ = nullptr;
    trace_.moments.push_back(std::move(res));
  }

 private:
  using Handles = std::pair<Did, Did>;  // (entity side, holder side)

  void dispatch(const ScriptMoment& sm) {
    switch (sm.kind) {
      case MomentKind::Graduation: return moment_graduation(sm);
      case MomentKind::GmcRegistration: return moment_gmc_registration(sm);
      case MomentKind::JobApplication: return moment_job_application(sm);
      case MomentKind::JoinHospital: return moment_join_hospital(sm);
      case MomentKind::Training: return moment_training(sm);
      case MomentKind::Rotation: return moment_rotation(sm);
      case MomentKind::RcpeAccreditation: return moment_rcpe_accreditation(sm);
      case MomentKind::Qualification: return moment_qualification(sm);
      case MomentKind::MoveAbroad: return moment_move_abroad(sm);
      case MomentKind::AppraisalRevalidation: return moment_appraisal(sm);
    }
  }

  [[noreturn]] void fail(const std::string& step, const std::string& cause) {
    throw ProtocolError(ErrorCode::StepFailed,
                        current_->moment_id + "/" + step + ": " + cause);
  }

  template <typename F>
  decltype(auto) step(const std::string& step_name, F&& f) {
    try {
      return f();
    } catch (const ProtocolError& e) {
      if (e.code() == ErrorCode::StepFailed) throw;
      fail(step_name, e.what());
    }
  }

  void tick(int interactions) {
    trace_.total_interactions += interactions;
    current_->interactions += interactions;
    eco_.clock().advance_seconds(
        static_cast<std::int64_t>(minutes_ * 60.0 * interactions));
  }

  std::string arg(const ScriptMoment& sm, const std::string& key,
                  const std::string& fallback) const {
    auto it = sm.args.find(key);
    return it == sm.args.end() ? fallback : it->second;
  }

  std::string today() const { return eco_.clock().now_iso().substr(0, 10); }

  Did did_of(const std::string& entity) { return eco_.agent(entity).public_did(); }

  RequestedAttribute want(const std::string& name, const std::string& schema_id,
                          const std::string& issuer_entity) {
    RequestedAttribute ra;
    ra.name = name;
    ra.restriction.schema_id = schema_id;
    ra.restriction.issuer_did = did_of(issuer_entity);
    return ra;
  }

  const Handles& ensure_connected(const std::string& entity,
                                  const std::string& mode) {
    auto it = links_.find(entity);
    if (it != links_.end()) return it->second;
    return step("connect", [&]() -> const Handles& {
      Agent& inviter = eco_.agent(entity);
      auto res = flows::connect(inviter, eco_.holder(), /*as_public=*/true, mode);
      tick(1);
      auto [pos, _] = links_.emplace(
          entity, Handles{res.inviter_handle, res.invitee_handle});
      return pos->second;
    });
  }

  void do_issue(const std::string& entity, const Handles& handles,
                const std::string& schema_id,
                const std::map<std::string, std::string>& values) {
    step("issue", [&] {
      auto out = flows::issue(eco_.agent(entity), handles.first, eco_.holder(),
                              schema_id, values);
      tick(1);
      if (!out.accepted) fail("issue", out.refusal_reason);
      current_->credential_ids.push_back(out.credential_id);
      issued_by_schema_[schema_id] = out.credential_id;
    });
  }

  void do_prove(const std::string& entity, const Handles& handles,
                const std::vector<RequestedAttribute>& requested) {
    step("present", [&] {
      auto out = flows::prove(eco_.agent(entity), handles.first, eco_.holder(),
                              requested);
      tick(2);
      current_->request_ids.push_back(out.request_id);
      if (!out.result) fail("present", out.problem.value_or("no presentation returned"));
      if (!out.result->accepted) {
        std::string failing = "rejected";
        for (const auto& [name, ok] : out.result->checks)
          if (!ok) {
            failing = "check failed: " + name;
            break;
          }
        fail("verify", failing);
      }
      record_proof_round(out.request_id, *out.result);
    });
  }

  /// Pull the request/presentation payloads back out of the recorded
  /// message stream so the trace carries the exchange verbatim.
  void record_proof_round(const std::string& request_id,
                          const VerificationResult& result) {
    ProofRound round;
    round.moment_id = current_->moment_id;
    round.result = verification_result_to_json(result);
    for (auto it = trace_.messages.rbegin(); it != trace_.messages.rend(); ++it) {
      const Json& env = *it;
      const std::string type = env.value("payload_type", "");
      if (type != "proof-request" && type != "presentation") continue;
      Bytes payload = bytes_from_json(env.at("payload"));
      Json decoded = Json::parse(
          std::string(reinterpret_cast<const char*>(payload.data()), payload.size()),
          nullptr, /*allow_exceptions=*/false);
      if (decoded.is_discarded()) continue;
      if (decoded.value("request_id", "") != request_id) continue;
      if (type == "proof-request" && round.request.is_null())
        round.request = std::move(decoded);
      else if (type == "presentation" && round.presentation.is_null())
        round.presentation = std::move(decoded);
      if (!round.request.is_null() && !round.presentation.is_null()) break;
    }
    trace_.proof_rounds.push_back(std::move(round));
  }

  // --- moment recipes -----------------------------------------------------

  void moment_graduation(const ScriptMoment& sm) {
    const std::string school = arg(sm, "school", "medical_school");
    const auto& h = ensure_connected(school, "face-to-face");
    do_issue(school, h, arg(sm, "schema", "medical_degree:1"),
             {{"full_name", holder_full_name()},
              {"date_of_birth", holder_dob()},
              {"university", "University of Edinburgh"},
              {"degree", "MBChB"},
              {"graduation_date", today()}});
  }

  void moment_gmc_registration([[maybe_unused]] const ScriptMoment& sm) {
    const auto& h = ensure_connected("gmc", "web");
    do_prove("gmc", h,
             {want("full_name", "medical_degree:1", "medical_school"),
              want("degree", "medical_degree:1", "medical_school")});
    do_issue("gmc", h, "gmc_license:1",
             {{"full_name", holder_full_name()},
              {"gmc_number", "7013456"},
              {"license_status", "full"}});
  }

  void moment_job_application(const ScriptMoment& sm) {
    const std::string hospital = arg(sm, "hospital", "edinburgh_hospital");
    const auto& h = ensure_connected(hospital, "web");
    do_prove(hospital, h,
             {want("full_name", "medical_degree:1", "medical_school"),
              want("degree", "medical_degree:1", "medical_school")});
  }

  void moment_join_hospital(const ScriptMoment& sm) {
    const std::string hospital = arg(sm, "hospital", "edinburgh_hospital");
    const auto& h = ensure_connected(hospital, "face-to-face");
    do_prove(hospital, h,
             {want("full_name", "gmc_license:1", "gmc"),
              want("gmc_number", "gmc_license:1", "gmc")});
    do_issue(hospital, h, arg(sm, "schema", "identity_verification:1"),
             {{"full_name", holder_full_name()},
              {"date_of_birth", holder_dob()},
              {"verified_on", today()}});
  }

  void moment_training(const ScriptMoment& sm) {
    const std::string provider = arg(sm, "provider", "hes");
    const auto& h = ensure_connected(provider, "web");
    do_prove(provider, h,
             {want("full_name", "gmc_license:1", "gmc"),
              want("gmc_number", "gmc_license:1", "gmc")});
    do_issue(provider, h, arg(sm, "schema", "training_certificate:1"),
             {{"full_name", holder_full_name()},
              {"course", arg(sm, "course", "Advanced Life Support")},
              {"completion_date", today()}});
  }

  void moment_rotation(const ScriptMoment& sm) {
    const std::string hospital = arg(sm, "hospital", "glasgow_hospital");
    const std::string prev = arg(sm, "verify_issuer", "edinburgh_hospital");
    const auto& h = ensure_connected(hospital, "face-to-face");
    // The incoming hospital accepts the previous hospital's identity check
    // instead of repeating it, then records the new post.
    do_prove(hospital, h,
             {want("full_name", "identity_verification:1", prev),
              want("date_of_birth", "identity_verification:1", prev)});
    do_issue(hospital, h, arg(sm, "schema", "employment:1"),
             {{"full_name", holder_full_name()},
              {"role", arg(sm, "role", "Senior House Officer")},
              {"hospital", eco_.agent(hospital).config().label},
              {"start_date", today()}});
  }

  void moment_rcpe_accreditation(const ScriptMoment& sm) {
    const auto& h = ensure_connected("rcpe", "web");
    do_prove("rcpe", h,
             {want("full_name", "gmc_license:1", "gmc"),
              want("gmc_number", "gmc_license:1", "gmc")});
    do_issue("rcpe", h, "accreditation:1",
             {{"full_name", holder_full_name()},
              {"programme", arg(sm, "programme", "Internal Medicine Training")},
              {"stage", arg(sm, "stage", "IMT1")}});
  }

  void moment_qualification(const ScriptMoment& sm) {
    const auto& h = ensure_connected("rcpe", "web");
    do_prove("rcpe", h,
             {want("programme", "accreditation:1", "rcpe"),
              want("gmc_number", "gmc_license:1", "gmc")});
    do_issue("rcpe", h, "qualified_physician:1",
             {{"full_name", holder_full_name()},
              {"specialty", arg(sm, "specialty", "General Internal Medicine")},
              {"qualified_on", today()}});
  }

  void moment_move_abroad(const ScriptMoment& sm) {
    const auto& h = ensure_connected("gmc", "web");
    do_prove("gmc", h,
             {want("full_name", "qualified_physician:1", "rcpe"),
              want("specialty", "qualified_physician:1", "rcpe"),
              want("gmc_number", "gmc_license:1", "gmc")});
    // Leaving the UK register: the regulator withdraws the licence.
    auto it = issued_by_schema_.find("gmc_license:1");
    if (it != issued_by_schema_.end()) {
      const std::string credential_id = it->second;
      step("revoke", [&] {
        eco_.agent("gmc").revoke_credential(credential_id,
                                            arg(sm, "reason", "relocated-abroad"));
      });
    }
  }

  void moment_appraisal([[maybe_unused]] const ScriptMoment& sm) {
    const auto& h = ensure_connected("gmc", "web");
    std::vector<RequestedAttribute> requested = {
        want("full_name", "gmc_license:1", "gmc"),
        want("gmc_number", "gmc_license:1", "gmc")};
    if (issued_by_schema_.count("training_certificate:1"))
      requested.push_back(want("course", "training_certificate:1", "hes"));
    do_prove("gmc", h, requested);
  }

  std::string holder_full_name() const { return eco_.config().holder_label; }
  std::string holder_dob() const { return "1996-05-14"; }

  Ecosystem& eco_;
  RunTrace& trace_;
  double minutes_;
  MomentResult* current_ = nullptr;
  std::map<std::string, Handles> links_;
  std::map<std::string, std::string> issued_by_schema_;  // schema -> last id
};

}  // namespace

RunTrace run_script(Ecosystem& eco, const ScenarioScript& script,
                    double minutes_per_interaction) {
  RunTrace trace;
  trace.script_name = script.name;
  trace.script_version = script.version;
  trace.seed = eco.seed();
  trace.profile = eco.config().profile;
  trace.career_length_days = script.career_length_days;

  eco.bus().set_observer([&eco, &trace](const std::string& inbox, const Envelope& env) {
    Json j = envelope_to_json(eco.params(), env);
    j["to_inbox"] = inbox;
    trace.messages.push_back(std::move(j));
  });

  Engine engine(eco, trace, minutes_per_interaction);
  try {
    for (const auto& sm : script.moments)
      engine.run_moment(sm, script.career_length_days);
  } catch (...) {
    eco.bus().set_observer(nullptr);
    throw;
  }
  eco.bus().set_observer(nullptr);

  trace.audit_jsonl = eco.audit().export_jsonl();
  trace.wallet_inventory = eco.holder().wallet().list_all_data(eco.params());
  return trace;
}

// ---------------------------------------------------------------------------
// Trace directory

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ProtocolError(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw ProtocolError(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace

void write_trace_dir(const RunTrace& trace, const Json& metrics_json,
                     const Json& principles_json, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw ProtocolError(ErrorCode::IoError, "cannot create directory " + dir);
  const std::filesystem::path base(dir);

  write_file(base / "trace.json", trace.summary_json().dump(2) + "\n");

  std::string messages;
  for (const auto& m : trace.messages) messages += m.dump() + "\n";
  write_file(base / "messages.jsonl", messages);

  write_file(base / "audit.jsonl", trace.audit_jsonl);
  write_file(base / "wallet.json", trace.wallet_inventory.dump(2) + "\n");
  write_file(base / "metrics.json", metrics_json.dump(2) + "\n");
  write_file(base / "principles.json", principles_json.dump(2) + "\n");
}

}  // namespace cpx
