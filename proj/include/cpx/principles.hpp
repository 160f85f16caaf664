#pragma once

#include <string>
#include <vector>

#include "cpx/jsonio.hpp"
#include "cpx/scenario.hpp"

namespace cpx {

/// Outcome of one design-principle check.  Machine-checkable principles run
/// an automated check against the trace or the live ecosystem and carry an
/// evidence pointer; the rest are reported as not machine-checkable with
/// their working definition.
struct PrincipleResult {
  std::string principle;
  std::string definition;
  bool machine_checkable = false;
  std::string check_id;  // empty when not machine-checkable
  bool pass = false;     // meaningful only when machine_checkable
  std::string evidence;
};

struct PrinciplesReport {
  std::vector<PrincipleResult> entries;

  bool all_checked_pass() const;
  Json to_json() const;
  static PrinciplesReport from_json(const Json& j);
  std::string render_table() const;
};

/// Runs every automated principle check over a finished trace plus the live
/// ecosystem it came from.  Report order follows elicited priority:
/// Protection, Control, Consent, Interoperability, then the remainder.
PrinciplesReport run_principles_checks(const RunTrace& trace, Ecosystem& eco);

}  // namespace cpx
