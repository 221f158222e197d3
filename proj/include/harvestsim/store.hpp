#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "harvestsim/csv.hpp"
#include "harvestsim/error.hpp"

namespace harvestsim {

// Lithium-ion capacitor plus the comparator-based deep-discharge protection.
// The protection circuit and the load switch draw a current from the capacitor;
// it is converted to power at the instantaneous capacitor voltage.
struct StorageSpec {
  std::string label = "storage";
  double capacitance = 0;  // F
  double v_max = 0;        // charge ceiling, V
  double v_destroy = 0;    // below this the cell is damaged
  double v_disconnect = 0; // load switch opens below this
  double v_reconnect = 0;  // load switch closes at or above this
  double protection_current = 0;      // A
  double switch_leakage_current = 0;  // A
  double self_discharge_power = 0;    // W

  void validate() const {
    auto fail = [&](const std::string& m) { throw Error(Errc::invalid, label + ": " + m); };
    if (!(capacitance > 0)) fail("capacitance must be > 0");
    if (!(v_destroy < v_disconnect && v_disconnect < v_reconnect && v_reconnect <= v_max))
      fail("thresholds must satisfy v_destroy < v_disconnect < v_reconnect <= v_max");
    if (!(protection_current >= 0 && switch_leakage_current >= 0 && self_discharge_power >= 0))
      fail("parasitic loads must be >= 0");
  }

  double parasitic_power(double v) const {
    return (protection_current + switch_leakage_current) * v + self_discharge_power;
  }
};

struct StorageState {
  double voltage = 0;
  bool connected = false;
  bool destroyed = false;
};

inline double energy_of(const StorageSpec& spec, double v) {
  if (!(v >= 0 && v <= spec.v_max * (1 + 1e-12)))
    throw Error(Errc::invalid, "voltage " + csv::format_number(v) + " V outside [0, " +
                                   csv::format_number(spec.v_max) + "] V");
  return 0.5 * spec.capacitance * v * v;
}

inline double usable_energy(const StorageSpec& spec, const StorageState& state) {
  if (state.voltage <= spec.v_disconnect) return 0.0;
  return std::max(0.0, energy_of(spec, state.voltage) - energy_of(spec, spec.v_disconnect));
}

// Per-step energy flows, all in J.
struct StepReport {
  double energy_in = 0;
  double parasitic = 0;  // actually drawn
  double delivered = 0;  // load energy actually drawn
  double discarded = 0;  // harvest above the charge ceiling
  double shortfall = 0;  // requested but not available (storage hit 0 V)
  bool disconnected = false;
  bool reconnected = false;
  bool destroyed = false;  // became destroyed during this step
};

struct StepOutcome {
  StorageState state;
  StepReport report;
};

// Advance the capacitor by one step. The load request is drawn in full when the
// switch is closed at step start, even if the voltage crosses v_disconnect
// within the step.
inline StepOutcome step_storage(const StorageSpec& spec, const StorageState& state, double p_in,
                                double p_load_request, double dt, double extra_parasitic_power = 0) {
  if (!(dt > 0)) throw Error(Errc::invalid, "step must be > 0");
  if (!(p_in >= 0 && p_load_request >= 0 && extra_parasitic_power >= 0))
    throw Error(Errc::invalid, "powers must be >= 0");

  StepReport r;
  const double e_old = 0.5 * spec.capacitance * state.voltage * state.voltage;
  const double e_max = 0.5 * spec.capacitance * spec.v_max * spec.v_max;
  r.energy_in = p_in * dt;
  r.parasitic = (spec.parasitic_power(state.voltage) + extra_parasitic_power) * dt;
  r.delivered = state.connected ? p_load_request * dt : 0.0;

  double e_new = e_old + r.energy_in - r.parasitic - r.delivered;
  if (e_new < 0) {
    double missing = -e_new;
    double cut = std::min(r.delivered, missing);
    r.delivered -= cut;
    missing -= cut;
    cut = std::min(r.parasitic, missing);
    r.parasitic -= cut;
    r.shortfall = -e_new;
    e_new = 0;
  }
  StorageState next = state;
  if (e_new >= e_max) {
    r.discarded = e_new - e_max;
    e_new = e_max;
    next.voltage = spec.v_max;
  } else {
    next.voltage = std::sqrt(2.0 * e_new / spec.capacitance);
  }

  if (next.connected && next.voltage < spec.v_disconnect) {
    next.connected = false;
    r.disconnected = true;
  } else if (!next.connected && next.voltage >= spec.v_reconnect) {
    next.connected = true;
    r.reconnected = true;
  }
  if (!next.destroyed && next.voltage < spec.v_destroy) {
    next.destroyed = true;
    r.destroyed = true;
  }
  return {next, r};
}

}  // namespace harvestsim
