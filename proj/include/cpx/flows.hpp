#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpx/agents.hpp"

namespace cpx::flows {

/// End-to-end helpers that drive two agents through a complete protocol
/// exchange, pumping the bus until every message is consumed.  These are the
/// building blocks the scenario engine counts as interactions.

struct ConnectResult {
  Did inviter_handle;
  Did invitee_handle;
};

ConnectResult connect(Agent& inviter, Agent& invitee, bool as_public,
                      const std::string& formation_mode);

struct IssueOutcome {
  bool accepted = false;
  std::string credential_id;
  std::string refusal_reason;
};

IssueOutcome issue(Agent& issuer, const Did& issuer_handle, Agent& holder,
                   const std::string& schema_id,
                   const std::map<std::string, std::string>& values);

struct ProofOutcome {
  std::string request_id;
  bool presented = false;
  std::optional<VerificationResult> result;
  std::optional<std::string> problem;
};

ProofOutcome prove(Agent& verifier, const Did& verifier_handle, Agent& holder,
                   const std::vector<RequestedAttribute>& requested);

}  // namespace cpx::flows
