// cpx — command-line front end for the clinical passporting toolkit.
//
// Exit codes: 0 success, 1 usage/config, 2 scenario step failure,
// 3 verification failure, 4 I/O or corrupt artifact.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cpx/agents.hpp"
#include "cpx/audit.hpp"
#include "cpx/canonical.hpp"
#include "cpx/errors.hpp"
#include "cpx/flows.hpp"
#include "cpx/metrics.hpp"
#include "cpx/presentation.hpp"
#include "cpx/principles.hpp"
#include "cpx/scenario.hpp"

namespace {

using cpx::ErrorCode;
using cpx::Json;
using cpx::ProtocolError;

int exit_code_for(const ProtocolError& e) {
  switch (e.code()) {
    case ErrorCode::StepFailed:
      return 2;
    case ErrorCode::IoError:
    case ErrorCode::CorruptExport:
    case ErrorCode::UnsupportedVersion:
      return 4;
    case ErrorCode::ConfigInvalid:
      return 1;
    default:
      return 3;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProtocolError(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ProtocolError(ErrorCode::IoError, "read failed: " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ProtocolError(ErrorCode::IoError, "cannot write " + path);
  out << content;
  if (!out) throw ProtocolError(ErrorCode::IoError, "short write: " + path);
}

Json read_json_file(const std::string& path) {
  Json j = Json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded())
    throw ProtocolError(ErrorCode::IoError, "not valid JSON: " + path);
  return j;
}

std::uint64_t resolve_seed(std::uint64_t flag_seed) {
  const char* env = std::getenv("CPX_SEED");
  if (!env || !*env) return flag_seed;
  char* end = nullptr;
  unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw ProtocolError(ErrorCode::ConfigInvalid,
                        std::string("CPX_SEED is not a number: ") + env);
  return static_cast<std::uint64_t>(value);
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag) {
  cpx::CanonicalWriter w;
  w.str("cpx:cli-seed:v1").u64(seed).str(tag);
  cpx::Hash32 d = cpx::sha256(w.out());
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | d[static_cast<std::size_t>(i)];
  return out;
}

void toy_guard(const std::string& profile, const std::string& out_path) {
  if (profile == "toy" && out_path.find("production") != std::string::npos)
    throw ProtocolError(ErrorCode::ConfigInvalid,
                        "toy profile refuses to write to a path containing "
                        "\"production\": " + out_path);
}

cpx::EcosystemConfig load_config(const std::string& config_path,
                                 const std::string& profile_flag) {
  cpx::EcosystemConfig cfg =
      config_path.empty()
          ? cpx::EcosystemConfig::default_config(
                profile_flag.empty() ? "production" : profile_flag)
          : cpx::EcosystemConfig::from_json(read_json_file(config_path));
  if (!config_path.empty() && !profile_flag.empty()) cfg.profile = profile_flag;
  cfg.validate();
  return cfg;
}

struct EcoHandle {
  std::unique_ptr<cpx::Ecosystem> eco;
  std::uint64_t seed = 0;
};

EcoHandle load_ecosystem_dir(const std::string& dir) {
  cpx::EcosystemConfig cfg =
      cpx::EcosystemConfig::from_json(read_json_file(dir + "/config.json"));
  Json run = read_json_file(dir + "/run.json");
  std::uint64_t seed = cpx::require_uint(run, "seed");
  EcoHandle handle;
  handle.seed = seed;
  handle.eco = cpx::setup_ecosystem(cfg, seed);
  return handle;
}

cpx::Agent& named_agent(cpx::Ecosystem& eco, const std::string& name) {
  if (!eco.has_agent(name))
    throw ProtocolError(ErrorCode::ConfigInvalid, "unknown agent: " + name);
  return eco.agent(name);
}

std::string issuer_label(const cpx::Registry& registry, const cpx::Did& did) {
  try {
    return registry.resolve(did).label;
  } catch (const ProtocolError&) {
    return did;
  }
}

// "name" or "name@schema_id@issuer_entity" (either suffix may be empty).
cpx::RequestedAttribute parse_attr_spec(cpx::Ecosystem& eco, const std::string& spec) {
  cpx::RequestedAttribute ra;
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    auto at = spec.find('@', start);
    if (at == std::string::npos) {
      parts.push_back(spec.substr(start));
      break;
    }
    parts.push_back(spec.substr(start, at - start));
    start = at + 1;
  }
  if (parts.empty() || parts[0].empty())
    throw ProtocolError(ErrorCode::ConfigInvalid, "bad --attr spec: " + spec);
  ra.name = parts[0];
  if (parts.size() > 1 && !parts[1].empty()) ra.restriction.schema_id = parts[1];
  if (parts.size() > 2 && !parts[2].empty()) {
    const std::string& who = parts[2];
    if (who.rfind("did:cpx:", 0) == 0)
      ra.restriction.issuer_did = who;
    else
      ra.restriction.issuer_did = named_agent(eco, who).public_did();
  }
  if (parts.size() > 3)
    throw ProtocolError(ErrorCode::ConfigInvalid, "bad --attr spec: " + spec);
  return ra;
}

struct SelectionPlan {
  std::vector<cpx::PresentationSource> sources;
  std::map<std::string, cpx::AttributeSource> mapping;
};

SelectionPlan plan_from_option(const cpx::Wallet& wallet,
                               const cpx::SelectionOption& option) {
  SelectionPlan plan;
  std::map<std::size_t, std::uint32_t> source_index;
  for (std::size_t idx : option.credentials_used) {
    const cpx::StoredCredential& sc = wallet.credentials()[idx];
    source_index[idx] = static_cast<std::uint32_t>(plan.sources.size());
    plan.sources.push_back(cpx::PresentationSource{sc.credential, sc.blinding});
  }
  for (const auto& [name, idx] : option.attr_to_credential)
    plan.mapping[name] = cpx::AttributeSource{source_index[idx], name};
  return plan;
}

// ---------------------------------------------------------------------------
// Subcommand bodies.  Each returns the process exit code.

int cmd_ecosystem_init(const std::string& config_path, const std::string& profile,
                       std::uint64_t seed, const std::string& out) {
  cpx::EcosystemConfig cfg = load_config(config_path, profile);
  seed = resolve_seed(seed);
  toy_guard(cfg.profile, out);
  auto eco = cpx::setup_ecosystem(cfg, seed);

  write_file(out + "/config.json", cfg.to_json().dump(2) + "\n");
  write_file(out + "/run.json", Json{{"seed", seed}}.dump(2) + "\n");
  write_file(out + "/registry.json", eco->registry().export_snapshot().dump(2) + "\n");

  Json agents = Json::array();
  std::cout << "ecosystem initialized (profile " << cfg.profile << ", seed " << seed
            << ")\n\n";
  std::printf("%-20s %-28s %-10s %s\n", "name", "label", "role", "did");
  for (const auto& e : cfg.entities) {
    cpx::Agent& a = eco->agent(e.name);
    agents.push_back(Json{{"name", e.name},
                          {"label", e.label},
                          {"role", cpx::agent_role_name(e.role)},
                          {"did", a.actor_did()}});
    std::printf("%-20s %-28s %-10s %s\n", e.name.c_str(), e.label.c_str(),
                cpx::agent_role_name(e.role).c_str(), a.actor_did().c_str());
  }
  cpx::Agent& holder = eco->holder();
  agents.push_back(Json{{"name", cfg.holder_name},
                        {"label", cfg.holder_label},
                        {"role", "holder"},
                        {"did", holder.actor_did()}});
  std::printf("%-20s %-28s %-10s %s\n", cfg.holder_name.c_str(),
              cfg.holder_label.c_str(), "holder", holder.actor_did().c_str());
  write_file(out + "/agents.json", agents.dump(2) + "\n");
  std::cout << "\nstate written to " << out << "\n";
  return 0;
}

int cmd_scenario_run(const std::string& script_path, const std::string& config_path,
                     const std::string& profile, std::uint64_t seed,
                     const std::string& out) {
  cpx::EcosystemConfig cfg = load_config(config_path, profile);
  seed = resolve_seed(seed);
  toy_guard(cfg.profile, out);
  cpx::ScenarioScript script = script_path.empty()
                                   ? cpx::ScenarioScript::default_career()
                                   : cpx::ScenarioScript::from_json(
                                         read_json_file(script_path));
  auto eco = cpx::setup_ecosystem(cfg, seed);

  cpx::RunTrace trace;
  try {
    trace = cpx::run_script(*eco, script);
  } catch (const ProtocolError& e) {
    if (e.code() == ErrorCode::StepFailed)
      std::cerr << "scenario step failed: " << e.what() << "\n";
    throw;
  }

  cpx::MetricsReport metrics = cpx::compute_metrics(trace, cpx::TimeModel::defaults());
  cpx::PrinciplesReport principles = cpx::run_principles_checks(trace, *eco);
  cpx::write_trace_dir(trace, metrics.to_json(), principles.to_json(), out);

  std::cout << "scenario \"" << script.name << "\" completed: "
            << trace.total_interactions << " interactions across "
            << trace.moments.size() << " moments (profile " << cfg.profile
            << ", seed " << seed << ")\n\n";
  std::cout << metrics.render_table() << "\n";
  std::cout << principles.render_table() << "\n";
  std::cout << "trace written to " << out << "\n";
  return 0;
}

int cmd_wallet_list(const std::string& eco_dir, const std::string& wallet_path,
                    const std::string& out_json) {
  EcoHandle h = load_ecosystem_dir(eco_dir);
  cpx::Wallet wallet = cpx::Wallet::import_wallet(h.eco->params(), h.eco->registry(),
                                                  read_file(wallet_path));
  std::printf("%-34s %-26s %-28s %s\n", "credential_id", "schema", "issuer",
              "attributes");
  for (const auto& sc : wallet.credentials()) {
    std::string attrs;
    for (const auto& [k, v] : sc.credential.values) {
      if (!attrs.empty()) attrs += ", ";
      attrs += k + "=" + v;
    }
    std::printf("%-34s %-26s %-28s %s\n", sc.credential.body.credential_id.c_str(),
                sc.credential.body.schema_id.c_str(),
                issuer_label(h.eco->registry(), sc.credential.body.issuer_did).c_str(),
                attrs.c_str());
  }
  std::cout << "\n" << wallet.credentials().size() << " credentials, "
            << wallet.consent_log().size() << " consent entries, "
            << wallet.connection_records(h.eco->params()).size() << " connections\n";
  if (!out_json.empty())
    write_file(out_json, wallet.list_all_data(h.eco->params()).dump(2) + "\n");
  return 0;
}

int cmd_wallet_export(const std::string& eco_dir, const std::string& wallet_path,
                      const std::string& out) {
  EcoHandle h = load_ecosystem_dir(eco_dir);
  toy_guard(h.eco->config().profile, out);
  cpx::Wallet wallet = cpx::Wallet::import_wallet(h.eco->params(), h.eco->registry(),
                                                  read_file(wallet_path));
  std::string text = wallet.export_wallet(h.eco->params());
  write_file(out, text);
  std::cout << "wallet exported to " << out << " (" << wallet.credentials().size()
            << " credentials, " << text.size() << " bytes)\n";
  return 0;
}

int cmd_wallet_import(const std::string& eco_dir, const std::string& wallet_path) {
  EcoHandle h = load_ecosystem_dir(eco_dir);
  cpx::Wallet wallet = cpx::Wallet::import_wallet(h.eco->params(), h.eco->registry(),
                                                  read_file(wallet_path));
  cpx::SeededRng rng(derive_seed(h.seed, "wallet-import-check"));
  bool linked = wallet.self_check(h.eco->params(), rng);
  std::cout << "wallet valid: " << wallet.credentials().size() << " credentials, "
            << wallet.consent_log().size() << " consent entries, link-secret check "
            << (linked ? "passed" : "FAILED") << "\n";
  return linked ? 0 : 3;
}

int cmd_issue(const std::string& eco_dir, const std::string& issuer,
              const std::string& holder, const std::string& schema,
              const std::string& values_path,
              const std::vector<std::string>& value_kvs,
              const std::string& wallet_in, const std::string& wallet_out,
              const std::string& out_cred) {
  EcoHandle h = load_ecosystem_dir(eco_dir);
  cpx::Agent& issuer_agent = named_agent(*h.eco, issuer);
  cpx::Agent& holder_agent =
      holder.empty() ? h.eco->holder() : named_agent(*h.eco, holder);

  if (!wallet_in.empty()) {
    holder_agent.wallet() = cpx::Wallet::import_wallet(
        h.eco->params(), h.eco->registry(), read_file(wallet_in));
    holder_agent.wallet().set_connection_source(&holder_agent.connections());
  }

  std::map<std::string, std::string> values;
  if (!values_path.empty()) {
    Json jv = read_json_file(values_path);
    if (!jv.is_object())
      throw ProtocolError(ErrorCode::ConfigInvalid, "values file must hold an object");
    for (auto it = jv.begin(); it != jv.end(); ++it)
      values[it.key()] = it.value().get<std::string>();
  }
  for (const auto& kv : value_kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ProtocolError(ErrorCode::ConfigInvalid, "bad --value (want k=v): " + kv);
    values[kv.substr(0, eq)] = kv.substr(eq + 1);
  }

  auto conn = cpx::flows::connect(issuer_agent, holder_agent, /*as_public=*/true, "cli");
  auto outcome =
      cpx::flows::issue(issuer_agent, conn.inviter_handle, holder_agent, schema, values);
  if (!outcome.accepted)
    throw ProtocolError(ErrorCode::ValidationError,
                        "issuance refused: " + outcome.refusal_reason);

  const cpx::StoredCredential* sc =
      holder_agent.wallet().find_credential(outcome.credential_id);
  if (!out_cred.empty() && sc)
    write_file(out_cred,
               cpx::issued_to_json(h.eco->params(), sc->credential).dump(2) + "\n");
  if (!wallet_out.empty())
    write_file(wallet_out, holder_agent.wallet().export_wallet(h.eco->params()));

  std::cout << "issued " << schema << " credential " << outcome.credential_id
            << " to " << holder_agent.name() << "\n";
  return 0;
}

int cmd_request_proof(const std::string& eco_dir, const std::string& verifier,
                      const std::vector<std::string>& attr_specs,
                      const std::string& spec_path, const std::string& out_request,
                      const std::string& nonce_state) {
  EcoHandle h = load_ecosystem_dir(eco_dir);
  cpx::Agent& v = named_agent(*h.eco, verifier);

  std::vector<cpx::RequestedAttribute> requested;
  if (!spec_path.empty()) {
    Json js = read_json_file(spec_path);
    for (const auto& ja : cpx::require_field(js, "requested")) {
      cpx::RequestedAttribute ra;
      ra.name = cpx::require_string(ja, "name");
      if (ja.contains("schema_id"))
        ra.restriction.schema_id = ja.at("schema_id").get<std::string>();
      if (ja.contains("issuer_did"))
        ra.restriction.issuer_did = ja.at("issuer_did").get<std::string>();
      else if (ja.contains("issuer_entity"))
        ra.restriction.issuer_did =
            named_agent(*h.eco, ja.at("issuer_entity").get<std::string>()).public_did();
      requested.push_back(std::move(ra));
    }
  }
  for (const auto& spec : attr_specs)
    requested.push_back(parse_attr_spec(*h.eco, spec));

  cpx::NonceTable table;
  if (std::filesystem::exists(nonce_state))
    table = cpx::NonceTable::from_json(read_json_file(nonce_state));

  cpx::SeededRng rng(
      derive_seed(h.seed, "request-proof:" + table.to_json().dump()));
  cpx::ProofRequest req = cpx::create_proof_request(
      v.actor_did(), requested,
      h.eco->clock().now() + cpx::kDefaultRequestExpirySeconds, table, rng);

  write_file(out_request, cpx::proof_request_to_json(req).dump(2) + "\n");
  write_file(nonce_state, table.to_json().dump(2) + "\n");
  std::cout << "proof request " << req.request_id << " (" << requested.size()
            << " attributes) written to " << out_request << "\n";
  return 0;
}

int cmd_present(const std::string& eco_dir, const std::string& wallet_path,
                const std::string& request_path, int option_index, bool deny,
                const std::string& out_pres, const std::string& wallet_out) {
  EcoHandle h = load_ecosystem_dir(eco_dir);
  const cpx::GroupParams& params = h.eco->params();
  cpx::Wallet wallet =
      cpx::Wallet::import_wallet(params, h.eco->registry(), read_file(wallet_path));
  cpx::ProofRequest req = cpx::proof_request_from_json(read_json_file(request_path));

  cpx::CandidateSelection selection =
      cpx::select_credentials(wallet.issued_list(), req);
  if (!selection.satisfiable) {
    std::string missing;
    for (const auto& m : selection.missing) {
      if (!missing.empty()) missing += ", ";
      missing += m;
    }
    throw ProtocolError(ErrorCode::SelectionInvalid,
                        "request unsatisfiable; missing: " + missing);
  }
  std::size_t pick = selection.default_option;
  if (option_index >= 0) {
    if (static_cast<std::size_t>(option_index) >= selection.options.size())
      throw ProtocolError(ErrorCode::ConfigInvalid,
                          "--option out of range (have " +
                              std::to_string(selection.options.size()) + ")");
    pick = static_cast<std::size_t>(option_index);
  }
  SelectionPlan plan = plan_from_option(wallet, selection.options[pick]);

  wallet.log_consent(cpx::ConsentEntry{req.request_id, deny ? "deny" : "allow",
                                       h.eco->clock().now(), "cli"});
  cpx::SeededRng rng(derive_seed(h.seed, "present:" + req.request_id));
  cpx::Presentation pres =
      cpx::create_presentation(params, req, plan.sources, plan.mapping,
                               wallet.link_secret(), /*consent=*/!deny, rng);

  write_file(out_pres, cpx::presentation_to_json(params, pres).dump(2) + "\n");
  if (!wallet_out.empty()) write_file(wallet_out, wallet.export_wallet(params));
  std::cout << "presentation for request " << req.request_id << " ("
            << pres.credentials.size() << " credentials) written to " << out_pres
            << "\n";
  return 0;
}

int cmd_verify(const std::string& eco_dir, const std::string& request_path,
               const std::string& presentation_path, const std::string& nonce_state) {
  EcoHandle h = load_ecosystem_dir(eco_dir);
  const cpx::GroupParams& params = h.eco->params();
  cpx::ProofRequest req = cpx::proof_request_from_json(read_json_file(request_path));
  cpx::Presentation pres =
      cpx::presentation_from_json(params, read_json_file(presentation_path));
  cpx::NonceTable table = cpx::NonceTable::from_json(read_json_file(nonce_state));

  cpx::VerificationResult result = cpx::verify_presentation(
      params, h.eco->registry(), req, pres, table, h.eco->clock().now());
  write_file(nonce_state, table.to_json().dump(2) + "\n");

  for (const auto& [name, ok] : result.checks)
    std::printf("%-12s %s\n", name.c_str(), ok ? "ok" : "FAIL");
  std::cout << (result.accepted ? "accepted" : "rejected") << "\n";
  if (result.accepted)
    for (const auto& [name, value] : result.disclosed_values)
      std::cout << "  " << name << " = " << value << "\n";
  return result.accepted ? 0 : 3;
}

int cmd_audit_verify(const std::string& log_path) {
  cpx::AuditLog log = cpx::AuditLog::import_jsonl(read_file(log_path));
  cpx::ChainStatus status = log.verify_chain();
  if (status.ok) {
    std::cout << "Ok (" << log.size() << " events)\n";
    return 0;
  }
  std::cout << "Broken(index=" << status.first_bad_index << ")\n";
  return 3;
}

int cmd_audit_trace(const std::string& log_path, const std::string& credential_id) {
  cpx::AuditLog log = cpx::AuditLog::import_jsonl(read_file(log_path));
  auto events = log.trace_credential(credential_id);
  for (const auto& e : events)
    std::printf("%6llu  %-24s %s\n", static_cast<unsigned long long>(e.index),
                cpx::audit_event_type_name(e.event_type).c_str(),
                e.actor_did.c_str());
  std::cout << events.size() << " events reference credential " << credential_id
            << "\n";
  return 0;
}

int cmd_report_metrics(const std::string& trace_dir, const std::string& out) {
  cpx::RunTrace trace =
      cpx::RunTrace::from_summary_json(read_json_file(trace_dir + "/trace.json"));
  cpx::MetricsReport report =
      cpx::compute_metrics(trace, cpx::TimeModel::defaults());
  std::cout << report.render_table();
  const std::string path = out.empty() ? trace_dir + "/metrics.json" : out;
  write_file(path, report.to_json().dump(2) + "\n");
  std::cout << "\nreport written to " << path << "\n";
  return 0;
}

int cmd_report_principles(const std::string& trace_dir, const std::string& out) {
  cpx::PrinciplesReport report = cpx::PrinciplesReport::from_json(
      read_json_file(trace_dir + "/principles.json"));
  std::cout << report.render_table();
  const std::string path = out.empty() ? trace_dir + "/principles.json" : out;
  write_file(path, report.to_json().dump(2) + "\n");
  std::cout << "\nreport written to " << path << "\n";
  return report.all_checked_pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cpx — self-sovereign clinical passporting toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  // ecosystem init
  auto* ecosystem = app.add_subcommand("ecosystem", "Ecosystem state management");
  ecosystem->require_subcommand(1);
  auto* init = ecosystem->add_subcommand("init", "Create registry and agent state");
  std::string init_config, init_profile, init_out = "ecosystem";
  std::uint64_t init_seed = 42;
  init->add_option("--config", init_config, "Ecosystem config JSON file");
  init->add_option("--profile", init_profile, "Group profile: toy | production");
  init->add_option("--seed", init_seed, "Deterministic seed")->capture_default_str();
  init->add_option("--out", init_out, "Output directory")->capture_default_str();
  init->callback(
      [&] { rc = cmd_ecosystem_init(init_config, init_profile, init_seed, init_out); });

  // scenario run
  auto* scenario = app.add_subcommand("scenario", "Career scenario execution");
  scenario->require_subcommand(1);
  auto* run = scenario->add_subcommand("run", "Run an identity-moment script");
  std::string run_script_path, run_config, run_profile, run_out = "trace";
  std::uint64_t run_seed = 42;
  run->add_option("--script", run_script_path, "Scenario script JSON (default career when omitted)");
  run->add_option("--config", run_config, "Ecosystem config JSON file");
  run->add_option("--profile", run_profile, "Group profile: toy | production");
  run->add_option("--seed", run_seed, "Deterministic seed")->capture_default_str();
  run->add_option("--out", run_out, "Trace output directory")->capture_default_str();
  run->callback([&] {
    rc = cmd_scenario_run(run_script_path, run_config, run_profile, run_seed, run_out);
  });

  // wallet list|export|import
  auto* wallet = app.add_subcommand("wallet", "Holder wallet operations");
  wallet->require_subcommand(1);
  std::string wl_eco = "ecosystem", wl_wallet, wl_out;
  auto* wlist = wallet->add_subcommand("list", "Enumerate wallet contents");
  wlist->add_option("--ecosystem", wl_eco, "Ecosystem state directory")->capture_default_str();
  wlist->add_option("--wallet", wl_wallet, "Wallet export file")->required();
  wlist->add_option("--out", wl_out, "Also write the full inventory JSON here");
  wlist->callback([&] { rc = cmd_wallet_list(wl_eco, wl_wallet, wl_out); });

  std::string we_eco = "ecosystem", we_wallet, we_out;
  auto* wexport = wallet->add_subcommand("export", "Validate and re-export a wallet");
  wexport->add_option("--ecosystem", we_eco, "Ecosystem state directory")->capture_default_str();
  wexport->add_option("--wallet", we_wallet, "Wallet export file")->required();
  wexport->add_option("--out", we_out, "Destination file")->required();
  wexport->callback([&] { rc = cmd_wallet_export(we_eco, we_wallet, we_out); });

  std::string wi_eco = "ecosystem", wi_wallet;
  auto* wimport = wallet->add_subcommand("import", "Validate a wallet export file");
  wimport->add_option("--ecosystem", wi_eco, "Ecosystem state directory")->capture_default_str();
  wimport->add_option("--wallet", wi_wallet, "Wallet export file")->required();
  wimport->callback([&] { rc = cmd_wallet_import(wi_eco, wi_wallet); });

  // issue
  auto* issue = app.add_subcommand("issue", "Run one issuance exchange");
  std::string is_eco = "ecosystem", is_issuer, is_holder, is_schema, is_values;
  std::string is_wallet_in, is_wallet_out, is_out;
  std::vector<std::string> is_value_kvs;
  issue->add_option("--ecosystem", is_eco, "Ecosystem state directory")->capture_default_str();
  issue->add_option("--issuer", is_issuer, "Issuing entity name")->required();
  issue->add_option("--holder", is_holder, "Holder agent name (default: config holder)");
  issue->add_option("--schema", is_schema, "Schema id, e.g. medical_degree:1")->required();
  issue->add_option("--values", is_values, "JSON file of attribute values");
  issue->add_option("--value", is_value_kvs, "Attribute value as name=value (repeatable)");
  issue->add_option("--wallet", is_wallet_in, "Existing holder wallet to extend");
  issue->add_option("--wallet-out", is_wallet_out, "Write the updated wallet here");
  issue->add_option("--out", is_out, "Write the issued credential JSON here");
  issue->callback([&] {
    rc = cmd_issue(is_eco, is_issuer, is_holder, is_schema, is_values, is_value_kvs,
                   is_wallet_in, is_wallet_out, is_out);
  });

  // request-proof
  auto* reqp = app.add_subcommand("request-proof", "Create a proof request");
  std::string rp_eco = "ecosystem", rp_verifier, rp_spec, rp_out, rp_nonces = "nonces.json";
  std::vector<std::string> rp_attrs;
  reqp->add_option("--ecosystem", rp_eco, "Ecosystem state directory")->capture_default_str();
  reqp->add_option("--verifier", rp_verifier, "Verifying entity name")->required();
  reqp->add_option("--attr", rp_attrs,
                   "Requested attribute: name[@schema_id[@issuer]] (repeatable)");
  reqp->add_option("--spec", rp_spec, "JSON file with a full requested-attribute list");
  reqp->add_option("--out", rp_out, "Proof request output file")->required();
  reqp->add_option("--nonce-state", rp_nonces, "Verifier nonce state file")->capture_default_str();
  reqp->callback([&] {
    rc = cmd_request_proof(rp_eco, rp_verifier, rp_attrs, rp_spec, rp_out, rp_nonces);
  });

  // present
  auto* present = app.add_subcommand("present", "Answer a proof request from a wallet");
  std::string pr_eco = "ecosystem", pr_wallet, pr_request, pr_out, pr_wallet_out;
  int pr_option = -1;
  bool pr_deny = false;
  present->add_option("--ecosystem", pr_eco, "Ecosystem state directory")->capture_default_str();
  present->add_option("--wallet", pr_wallet, "Holder wallet export file")->required();
  present->add_option("--request", pr_request, "Proof request JSON file")->required();
  present->add_option("--option", pr_option, "Selection option index (default: fewest credentials)");
  present->add_flag("--deny", pr_deny, "Withhold consent (the presentation is refused)");
  present->add_option("--out", pr_out, "Presentation output file")->required();
  present->add_option("--wallet-out", pr_wallet_out, "Write the wallet (with consent entry) here");
  present->callback([&] {
    rc = cmd_present(pr_eco, pr_wallet, pr_request, pr_option, pr_deny, pr_out,
                     pr_wallet_out);
  });

  // verify
  auto* verify = app.add_subcommand("verify", "Verify a presentation file");
  std::string vf_eco = "ecosystem", vf_request, vf_pres, vf_nonces = "nonces.json";
  verify->add_option("--ecosystem", vf_eco, "Ecosystem state directory")->capture_default_str();
  verify->add_option("--request", vf_request, "Proof request JSON file")->required();
  verify->add_option("--presentation", vf_pres, "Presentation JSON file")->required();
  verify->add_option("--nonce-state", vf_nonces, "Verifier nonce state file")->capture_default_str();
  verify->callback([&] { rc = cmd_verify(vf_eco, vf_request, vf_pres, vf_nonces); });

  // audit verify | trace
  auto* audit = app.add_subcommand("audit", "Audit log inspection");
  audit->require_subcommand(1);
  std::string av_log;
  auto* averify = audit->add_subcommand("verify", "Check the hash chain");
  averify->add_option("--log", av_log, "Audit JSONL file")->required();
  averify->callback([&] { rc = cmd_audit_verify(av_log); });

  std::string at_log, at_credential;
  auto* atrace = audit->add_subcommand("trace", "Events referencing a credential");
  atrace->add_option("--log", at_log, "Audit JSONL file")->required();
  atrace->add_option("--credential", at_credential, "Credential id")->required();
  atrace->callback([&] { rc = cmd_audit_trace(at_log, at_credential); });

  // report metrics | principles
  auto* report = app.add_subcommand("report", "Render run reports");
  report->require_subcommand(1);
  std::string rm_trace, rm_out;
  auto* rmetrics = report->add_subcommand("metrics", "Baseline-vs-SSI time metrics");
  rmetrics->add_option("--trace", rm_trace, "RunTrace directory")->required();
  rmetrics->add_option("--out", rm_out, "Report JSON destination (default: into the trace dir)");
  rmetrics->callback([&] { rc = cmd_report_metrics(rm_trace, rm_out); });

  std::string rp2_trace, rp2_out;
  auto* rprinciples = report->add_subcommand("principles", "Design-principle checks");
  rprinciples->add_option("--trace", rp2_trace, "RunTrace directory")->required();
  rprinciples->add_option("--out", rp2_out, "Report JSON destination (default: into the trace dir)");
  rprinciples->callback([&] { rc = cmd_report_principles(rp2_trace, rp2_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ProtocolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return rc;
}
