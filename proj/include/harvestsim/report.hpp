#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "harvestsim/csv.hpp"
#include "harvestsim/engine.hpp"
#include "harvestsim/planner.hpp"

namespace harvestsim::report {

using ordered_json = nlohmann::ordered_json;

// CSV outputs may start with "# manifest: <digest>"; trace readers skip '#' lines.
inline void write_manifest_line(std::ostream& out, const std::string& digest) {
  if (!digest.empty()) out << "# manifest: " << digest << '\n';
}

inline void write_soc_csv(std::ostream& out, const SimResult& r, const std::string& digest = {}) {
  write_manifest_line(out, digest);
  csv::write_row(out, {"timestamp", "voltage", "connected", "discarded_energy_cum"});
  for (const auto& s : r.soc)
    csv::write_row(out, {csv::format_number(s.t), csv::format_number(s.voltage), s.connected ? "1" : "0",
                         csv::format_number(s.discarded_cum)});
}

inline void write_events_csv(std::ostream& out, const SimResult& r, const std::string& digest = {}) {
  write_manifest_line(out, digest);
  csv::write_row(out, {"timestamp", "kind", "energy_J"});
  for (const auto& e : r.events)
    csv::write_row(out, {csv::format_number(e.t), to_string(e.kind), csv::format_number(e.energy)});
}

inline ordered_json ledger_json(const SimResult& r) {
  auto check = ledger_check(r);
  const auto& l = r.ledger;
  ordered_json j;
  j["label"] = r.label;
  j["ledger_J"] = {{"harvested", l.harvested}, {"converted", l.converted}, {"sleep", l.sleep},
                   {"active", l.active},       {"parasitic", l.parasitic}, {"discarded", l.discarded},
                   {"delta_stored", l.delta_stored}};
  j["ledger_check"] = {{"ok", check.ok}, {"relative_residual", check.residual}};
  j["stats"] = {{"steps", r.stats.steps},
                {"cycles", r.stats.cycles},
                {"missed_cycles", r.stats.missed_cycles},
                {"snapped_cycles", r.stats.snapped_cycles},
                {"max_snap_s", r.stats.max_snap},
                {"shortfall_J", r.stats.shortfall}};
  j["events"] = {{"measure_tx", r.count(EventKind::measure_tx)},
                 {"disconnect", r.count(EventKind::disconnect)},
                 {"reconnect", r.count(EventKind::reconnect)},
                 {"destroyed", r.count(EventKind::destroyed)},
                 {"surplus_discard", r.count(EventKind::surplus_discard)}};
  j["final_state"] = {{"voltage_V", r.final_state.voltage},
                      {"connected", r.final_state.connected},
                      {"destroyed", r.final_state.destroyed}};
  j["warnings"] = r.warnings;
  return j;
}

inline ordered_json estimate_json(const AnnualEstimate& e) {
  ordered_json j;
  j["config_label"] = e.config_label;
  j["q"] = e.quality_factor ? ordered_json(*e.quality_factor) : ordered_json(nullptr);
  j["E_harvest_J"] = e.energy_harvest_year;
  j["E_sleep_J"] = e.energy_sleep_year;
  j["E_available_J"] = e.energy_available;
  j["active_cycle_J"] = e.active_energy;
  j["n_cycles"] = e.n_cycles;
  j["interval_s"] = e.interval_s;
  j["feasible"] = e.feasible;
  j["weekly_budget_J"] = e.weekly_budget;
  j["weekly_buffer_J"] = e.weekly_buffer;
  return j;
}

inline ordered_json extrapolation_json(const AnnualExtrapolation& x) {
  ordered_json j;
  j["E_year_J"] = x.energy_year;
  j["monthly_J"] = x.monthly;
  j["span_days"] = x.span_s / kDaySeconds;
  j["scale_to_year"] = x.scale;
  if (x.pv_calibration)
    j["pv_calibration"] = {{"k", x.pv_calibration->k},
                           {"residual_rms", x.pv_calibration->residual_rms},
                           {"overlap_hours", x.pv_calibration->overlap_s / 3600.0}};
  if (x.fitted_quality_factor) j["fitted_quality_factor"] = *x.fitted_quality_factor;
  j["warnings"] = x.warnings;
  return j;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& s, const std::string& digest = {}) {
  write_manifest_line(out, digest);
  csv::write_row(out, {"config_label", "q", "E_harvest_J", "E_sleep_J", "E_available_J", "n_cycles", "interval_s",
                       "feasible"});
  for (const auto& r : s.rows)
    csv::write_row(out, {r.config_label, r.quality_factor ? csv::format_number(*r.quality_factor) : "",
                         csv::format_number(r.energy_harvest_year), csv::format_number(r.energy_sleep_year),
                         csv::format_number(r.energy_available), std::to_string(r.n_cycles),
                         csv::format_number(r.interval_s), r.feasible ? "true" : "false"});
}

inline ordered_json sweep_json(const SweepResult& s) {
  ordered_json j;
  j["rows"] = ordered_json::array();
  for (const auto& r : s.rows) j["rows"].push_back(estimate_json(r));
  j["skipped"] = s.skipped;
  return j;
}

}  // namespace harvestsim::report
