#include "cpx/metrics.hpp"

#include <cstdio>

#include "cpx/errors.hpp"

namespace cpx {

double MomentCost::total_days() const {
  double total = 0.0;
  for (const auto& p : parts) total += p.days;
  return total;
}

TimeModel TimeModel::defaults() {
  TimeModel m;
  m.ssi_minutes_per_interaction = 2.0;
  m.working_hours_per_day = 8.0;

  const std::vector<CostPart> onboarding = {
      {"hospital onboarding identity check", 2.0, true},
      {"consultant evidence verification", 1.0, true},
      {"induction (midpoint of one-to-two-day range)", 1.5, true},
      {"occupational health appointment", 0.5, false},
  };

  m.baseline[MomentKind::Graduation] = {
      {{"credential administration around graduation", 1.0, false}}};
  m.baseline[MomentKind::GmcRegistration] = {
      {{"regulator identity check and registration", 1.0, false}}};
  m.baseline[MomentKind::JobApplication] = {
      {{"application document verification", 1.0, false}}};
  m.baseline[MomentKind::JoinHospital] = {onboarding};
  m.baseline[MomentKind::Training] = {
      {{"training record administration", 0.5, false}}};
  m.baseline[MomentKind::Rotation] = {onboarding};
  m.baseline[MomentKind::RcpeAccreditation] = {
      {{"college registry cross-check", 1.0, false}}};
  m.baseline[MomentKind::Qualification] = {
      {{"qualification conferral administration", 1.0, false}}};
  m.baseline[MomentKind::MoveAbroad] = {
      {{"international credential verification", 3.0, false}}};
  m.baseline[MomentKind::AppraisalRevalidation] = {
      {{"appraisal and re-validation", 2.0, true}}};
  return m;
}

double TimeModel::moment_baseline_days(MomentKind kind) const {
  auto it = baseline.find(kind);
  return it == baseline.end() ? 0.0 : it->second.total_days();
}

double TimeModel::interactions_to_days(int interactions) const {
  return static_cast<double>(interactions) * ssi_minutes_per_interaction /
         (60.0 * working_hours_per_day);
}

namespace {

Json cost_part_to_json(const CostPart& p) {
  Json j;
  j["task"] = p.task;
  j["days"] = p.days;
  j["source"] = p.cited ? "cited" : "assumed";
  return j;
}

CostPart cost_part_from_json(const Json& j) {
  CostPart p;
  p.task = require_string(j, "task");
  const Json& days = require_field(j, "days");
  if (!days.is_number())
    throw ProtocolError(ErrorCode::ValidationError, "days must be a number");
  p.days = days.get<double>();
  p.cited = require_string(j, "source") == "cited";
  return p;
}

}  // namespace

Json TimeModel::to_json() const {
  Json baseline_j;
  for (const auto& [kind, cost] : baseline) {
    Json parts = Json::array();
    for (const auto& p : cost.parts) parts.push_back(cost_part_to_json(p));
    baseline_j[moment_kind_name(kind)] = std::move(parts);
  }
  Json j;
  j["ssi_minutes_per_interaction"] = ssi_minutes_per_interaction;
  j["working_hours_per_day"] = working_hours_per_day;
  j["baseline"] = std::move(baseline_j);
  return j;
}

TimeModel TimeModel::from_json(const Json& j) {
  TimeModel m;
  const Json& mins = require_field(j, "ssi_minutes_per_interaction");
  const Json& hours = require_field(j, "working_hours_per_day");
  if (!mins.is_number() || !hours.is_number())
    throw ProtocolError(ErrorCode::ValidationError, "time model fields must be numbers");
  m.ssi_minutes_per_interaction = mins.get<double>();
  m.working_hours_per_day = hours.get<double>();
  if (m.ssi_minutes_per_interaction < 0.0 || m.working_hours_per_day <= 0.0)
    throw ProtocolError(ErrorCode::ValidationError, "time model fields out of range");
  const Json& baseline = require_field(j, "baseline");
  if (!baseline.is_object())
    throw ProtocolError(ErrorCode::ValidationError, "baseline must be an object");
  for (auto it = baseline.begin(); it != baseline.end(); ++it) {
    MomentCost cost;
    if (!it.value().is_array())
      throw ProtocolError(ErrorCode::ValidationError, "baseline parts must be an array");
    for (const auto& jp : it.value()) cost.parts.push_back(cost_part_from_json(jp));
    m.baseline[moment_kind_from_name(it.key())] = std::move(cost);
  }
  return m;
}

MetricsReport compute_metrics(const RunTrace& trace, const TimeModel& model) {
  MetricsReport report;
  for (const auto& m : trace.moments) {
    MetricsRow row;
    row.moment_id = m.moment_id;
    row.kind = m.kind;
    row.start_day = m.day;
    row.occurrences = m.occurrences;
    row.interactions = m.interactions;
    auto it = model.baseline.find(m.kind);
    if (it != model.baseline.end()) row.baseline_parts = it->second.parts;
    row.baseline_days = model.moment_baseline_days(m.kind) * m.occurrences;
    row.ssi_days = model.interactions_to_days(m.interactions);
    row.saved_days = row.baseline_days - row.ssi_days;
    report.total_interactions += row.interactions;
    report.total_baseline_days += row.baseline_days;
    report.total_ssi_days += row.ssi_days;
    report.total_saved_days += row.saved_days;
    report.rows.push_back(std::move(row));
  }
  return report;
}

Json MetricsReport::to_json() const {
  Json rows_j = Json::array();
  for (const auto& r : rows) {
    Json parts = Json::array();
    for (const auto& p : r.baseline_parts) parts.push_back(cost_part_to_json(p));
    Json jr;
    jr["moment_id"] = r.moment_id;
    jr["kind"] = moment_kind_name(r.kind);
    jr["start_day"] = r.start_day;
    jr["occurrences"] = r.occurrences;
    jr["interactions"] = r.interactions;
    jr["baseline_days"] = r.baseline_days;
    jr["ssi_days"] = r.ssi_days;
    jr["saved_days"] = r.saved_days;
    jr["baseline_parts"] = std::move(parts);
    rows_j.push_back(std::move(jr));
  }
  Json totals;
  totals["interactions"] = total_interactions;
  totals["baseline_days"] = total_baseline_days;
  totals["ssi_days"] = total_ssi_days;
  totals["saved_days"] = total_saved_days;
  Json j;
  j["rows"] = std::move(rows_j);
  j["totals"] = std::move(totals);
  return j;
}

MetricsReport MetricsReport::from_json(const Json& j) {
  MetricsReport report;
  const Json& rows = require_field(j, "rows");
  if (!rows.is_array())
    throw ProtocolError(ErrorCode::ValidationError, "rows must be an array");
  for (const auto& jr : rows) {
    MetricsRow r;
    r.moment_id = require_string(jr, "moment_id");
    r.kind = moment_kind_from_name(require_string(jr, "kind"));
    r.start_day = require_int(jr, "start_day");
    r.occurrences = static_cast<int>(require_int(jr, "occurrences"));
    r.interactions = static_cast<int>(require_int(jr, "interactions"));
    r.baseline_days = require_field(jr, "baseline_days").get<double>();
    r.ssi_days = require_field(jr, "ssi_days").get<double>();
    r.saved_days = require_field(jr, "saved_days").get<double>();
    if (jr.contains("baseline_parts"))
      for (const auto& jp : jr.at("baseline_parts"))
        r.baseline_parts.push_back(cost_part_from_json(jp));
    report.rows.push_back(std::move(r));
  }
  const Json& totals = require_field(j, "totals");
  report.total_interactions = static_cast<int>(require_int(totals, "interactions"));
  report.total_baseline_days = require_field(totals, "baseline_days").get<double>();
  report.total_ssi_days = require_field(totals, "ssi_days").get<double>();
  report.total_saved_days = require_field(totals, "saved_days").get<double>();
  return report;
}

std::string MetricsReport::render_table() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %-24s %9s %4s %5s %13s %10s %12s\n",
                "moment", "kind", "start_day", "occ", "intx", "baseline_days",
                "ssi_days", "saved_days");
  out += line;
  out += std::string(107, '-') + "\n";
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-24s %-24s %9lld %4d %5d %13.3f %10.4f %12.4f\n",
                  r.moment_id.c_str(), moment_kind_name(r.kind).c_str(),
                  static_cast<long long>(r.start_day), r.occurrences, r.interactions,
                  r.baseline_days, r.ssi_days, r.saved_days);
    out += line;
  }
  out += std::string(107, '-') + "\n";
  std::snprintf(line, sizeof(line), "%-24s %-24s %9s %4s %5d %13.3f %10.4f %12.4f\n",
                "total", "", "", "", total_interactions, total_baseline_days,
                total_ssi_days, total_saved_days);
  out += line;
  return out;
}

}  // namespace cpx
