#include "cpx/flows.hpp"

namespace cpx::flows {

ConnectResult connect(Agent& inviter, Agent& invitee, bool as_public,
                      const std::string& formation_mode) {
  Invitation inv = inviter.invite(as_public, formation_mode);
  Did invitee_handle = invitee.accept(inv);
  return ConnectResult{inv.inviter_peer_did, invitee_handle};
}

IssueOutcome issue(Agent& issuer, const Did& issuer_handle, Agent& holder,
                   const std::string& schema_id,
                   const std::map<std::string, std::string>& values) {
  issuer.send_offer(issuer_handle, schema_id, values);
  holder.process_inbox();  // offer -> blinded request
  issuer.process_inbox();  // request -> signed credential
  holder.process_inbox();  // verify_and_store -> ack or problem-report
  issuer.process_inbox();  // consume the receipt
  IssueOutcome outcome;
  if (auto receipt = holder.last_issue_receipt()) {
    outcome.accepted = receipt->accepted;
    outcome.credential_id = receipt->credential_id;
    outcome.refusal_reason = receipt->refusal_reason;
  }
  return outcome;
}

ProofOutcome prove(Agent& verifier, const Did& verifier_handle, Agent& holder,
                   const std::vector<RequestedAttribute>& requested) {
  ProofOutcome outcome;
  outcome.request_id = verifier.send_proof_request(verifier_handle, requested);
  holder.process_inbox();    // consent decision -> presentation or refusal
  verifier.process_inbox();  // verify -> ack
  holder.process_inbox();    // consume the ack
  outcome.result = verifier.verification_result(outcome.request_id);
  outcome.problem = verifier.problem_report(outcome.request_id);
  outcome.presented = outcome.result.has_value();
  return outcome;
}

}  // namespace cpx::flows
