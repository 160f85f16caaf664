#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cpx/agents.hpp"
#include "cpx/audit.hpp"
#include "cpx/connections.hpp"
#include "cpx/jsonio.hpp"
#include "cpx/registry.hpp"
#include "cpx/simtime.hpp"

namespace cpx {

/// The career stages a script can exercise.  Each kind maps to a fixed
/// protocol recipe (who connects to whom, what gets proven, what gets
/// issued); calendar placement and arguments come from the script.
enum class MomentKind {
  Graduation,
  GmcRegistration,
  JobApplication,
  JoinHospital,
  Training,
  Rotation,
  RcpeAccreditation,
  Qualification,
  MoveAbroad,
  AppraisalRevalidation,
};

std::string moment_kind_name(MomentKind k);
MomentKind moment_kind_from_name(const std::string& s);

/// One configured ecosystem participant and the schemas it authors.
struct EntityConfig {
  std::string name;   // short id, e.g. "gmc"
  std::string label;  // display name, e.g. "General Medical Council"
  AgentRole role = AgentRole::Mixed;
  std::vector<CredentialSchema> schemas;
};

/// Full ecosystem description: group profile, trust-anchor entities, and the
/// single credential holder the career scripts revolve around.
struct EcosystemConfig {
  std::string profile = "toy";
  std::string holder_name = "doctor";
  std::string holder_label = "Dr. Alex Doe";
  std::vector<EntityConfig> entities;

  static EcosystemConfig default_config(const std::string& profile = "toy");
  Json to_json() const;
  static EcosystemConfig from_json(const Json& j);
  /// Throws ConfigInvalid on duplicate entity names, duplicate schema ids,
  /// holder/entity name collisions, or an unknown group profile.
  void validate() const;
};

/// One scripted identity moment.  `day` places the first occurrence on the
/// simulated calendar; `recur_days` repeats it until the career ends.
struct ScriptMoment {
  std::string moment_id;
  MomentKind kind = MomentKind::Graduation;
  std::int64_t day = 0;
  std::map<std::string, std::string> args;
  std::optional<std::int64_t> recur_days;
};

struct ScenarioScript {
  int version = 1;
  std::string name;
  std::int64_t career_length_days = 0;
  std::vector<ScriptMoment> moments;

  static ScenarioScript default_career();
  Json to_json() const;
  static ScenarioScript from_json(const Json& j);
};

/// Live, wired ecosystem: registry, bus, audit chain, clock, and one agent
/// per configured entity plus the holder.  Non-movable because agents hold
/// pointers into it; create through setup_ecosystem.
class Ecosystem {
 public:
  Ecosystem(EcosystemConfig config, std::uint64_t seed);
  Ecosystem(const Ecosystem&) = delete;
  Ecosystem& operator=(const Ecosystem&) = delete;

  const GroupParams& params() const { return *params_; }
  Registry& registry() { return registry_; }
  const Registry& registry() const { return registry_; }
  MessageBus& bus() { return bus_; }
  AuditLog& audit() { return audit_; }
  const AuditLog& audit() const { return audit_; }
  SimClock& clock() { return clock_; }
  const SimClock& clock() const { return clock_; }

  /// Throws NotFound for unknown agent names.
  Agent& agent(const std::string& name);
  Agent& holder() { return agent(config_.holder_name); }
  bool has_agent(const std::string& name) const { return agents_.count(name) > 0; }

  const EcosystemConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  /// Which entity authors the given schema, if any.
  std::optional<std::string> schema_owner(const std::string& schema_id) const;

 private:
  EcosystemConfig config_;
  std::uint64_t seed_;
  const GroupParams* params_;
  Registry registry_;
  MessageBus bus_;
  AuditLog audit_;
  SimClock clock_;
  std::map<std::string, std::unique_ptr<Agent>> agents_;
};

/// Deterministic bring-up: publishes every entity's DID and schemas, in
/// config order, using per-agent seeds derived from (seed, agent name).
std::unique_ptr<Ecosystem> setup_ecosystem(const EcosystemConfig& config,
                                           std::uint64_t seed);

/// Per-moment outcome recorded while a script runs.
struct MomentResult {
  std::string moment_id;
  MomentKind kind = MomentKind::Graduation;
  std::int64_t day = 0;  // first occurrence
  int occurrences = 1;
  int interactions = 0;  // total across occurrences
  std::vector<std::string> credential_ids;
  std::vector<std::string> request_ids;
};

/// One verified exchange: the request as sent, the presentation as
/// delivered, and the verifier's check-by-check result.
struct ProofRound {
  std::string moment_id;
  Json request;
  Json presentation;
  Json result;
};

/// Everything a finished run leaves behind.  Exports as a directory of JSON
/// artifacts; identical (config, script, seed) produce byte-identical files.
struct RunTrace {
  std::string script_name;
  int script_version = 1;
  std::uint64_t seed = 0;
  std::string profile;
  std::int64_t career_length_days = 0;
  int total_interactions = 0;
  std::vector<MomentResult> moments;
  std::vector<Json> messages;  // every delivered envelope, in order
  std::vector<ProofRound> proof_rounds;
  std::string audit_jsonl;
  Json wallet_inventory;

  Json summary_json() const;
  static RunTrace from_summary_json(const Json& j);
};

/// Executes every moment in script order, pumping the message bus and
/// advancing the simulated clock per interaction.  Any protocol failure
/// halts the run with StepFailed("<moment>/<step>: <cause>").
RunTrace run_script(Ecosystem& eco, const ScenarioScript& script,
                    double minutes_per_interaction = 2.0);

/// Writes trace.json, messages.jsonl, audit.jsonl, wallet.json plus the two
/// reports (metrics.json, principles.json) into `dir`, creating it.
void write_trace_dir(const RunTrace& trace, const Json& metrics_json,
                     const Json& principles_json, const std::string& dir);

}  // namespace cpx
