#pragma once

#include <map>
#include <string>
#include <vector>

#include "cpx/jsonio.hpp"
#include "cpx/scenario.hpp"

namespace cpx {

/// One component of a moment's baseline cost.  `cited` marks figures taken
/// from published workload descriptions; everything else is a labeled
/// modeling assumption, never presented as a finding.
struct CostPart {
  std::string task;
  double days = 0.0;
  bool cited = false;
};

struct MomentCost {
  std::vector<CostPart> parts;
  double total_days() const;
};

/// Baseline-vs-SSI accounting knobs.  The SSI side prices every protocol
/// interaction at a flat per-interaction duration (a configuration default,
/// not an empirical claim) converted at one day = eight working hours.
struct TimeModel {
  double ssi_minutes_per_interaction = 2.0;
  double working_hours_per_day = 8.0;
  std::map<MomentKind, MomentCost> baseline;

  static TimeModel defaults();
  double moment_baseline_days(MomentKind kind) const;
  double interactions_to_days(int interactions) const;
  Json to_json() const;
  static TimeModel from_json(const Json& j);
};

/// One report row per scripted moment; recurring moments aggregate their
/// occurrences into a single row.
struct MetricsRow {
  std::string moment_id;
  MomentKind kind = MomentKind::Graduation;
  std::int64_t start_day = 0;
  int occurrences = 1;
  int interactions = 0;
  double baseline_days = 0.0;
  double ssi_days = 0.0;
  double saved_days = 0.0;
  std::vector<CostPart> baseline_parts;  // per occurrence
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  int total_interactions = 0;
  double total_baseline_days = 0.0;
  double total_ssi_days = 0.0;
  double total_saved_days = 0.0;

  Json to_json() const;
  static MetricsReport from_json(const Json& j);
  /// Fixed-width table for terminal display.
  std::string render_table() const;
};

MetricsReport compute_metrics(const RunTrace& trace, const TimeModel& model);

}  // namespace cpx
