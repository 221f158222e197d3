#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "harvestsim/convert.hpp"
#include "harvestsim/harvest.hpp"
#include "harvestsim/node.hpp"
#include "harvestsim/store.hpp"
#include "harvestsim/traces.hpp"

namespace harvestsim {

// Media temperature difference given directly (K, signed).
struct DeltaTEnv {
  EnvTrace delta_t;
};

// Two absolute temperatures; the engine uses water - wall.
struct TemperaturePairEnv {
  EnvTrace water;
  EnvTrace wall;
};

struct IrradianceEnv {
  EnvTrace irradiance;
};

using Environment = std::variant<DeltaTEnv, TemperaturePairEnv, IrradianceEnv>;

struct SystemConfig {
  std::string label = "system";
  Harvester harvester = TegSpec{};
  ConverterSpec converter;
  StorageSpec storage;
  NodeSpec node;
  Environment env = IrradianceEnv{EnvTrace(Quantity::irradiance_W_per_m2, {{0, 0}, {1, 0}})};
  double step = 60.0;                     // s
  std::optional<double> initial_voltage;  // defaults to storage.v_reconnect
  std::optional<double> t_start;          // defaults to the environment's coverage
  std::optional<double> t_end;
};

enum class EventKind { measure_tx, disconnect, reconnect, destroyed, surplus_discard };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::measure_tx: return "measure_tx";
    case EventKind::disconnect: return "disconnect";
    case EventKind::reconnect: return "reconnect";
    case EventKind::destroyed: return "destroyed";
    case EventKind::surplus_discard: return "surplus_discard";
  }
  return "unknown";
}

struct Event {
  double t = 0;
  EventKind kind = EventKind::measure_tx;
  double energy = 0;  // J
};

// All terms in J over the whole run.
struct Ledger {
  double harvested = 0;  // available at the harvester
  double converted = 0;  // delivered by the converter into storage
  double sleep = 0;
  double active = 0;
  double parasitic = 0;  // protection, switch leakage, self-discharge, converter quiescent
  double discarded = 0;  // lost at the charge ceiling
  double delta_stored = 0;
};

struct SocSample {
  double t = 0;
  double voltage = 0;
  bool connected = false;
  double discarded_cum = 0;
};

struct SimStats {
  std::size_t steps = 0;
  std::size_t cycles = 0;
  std::size_t missed_cycles = 0;   // due while the load switch was open
  std::size_t snapped_cycles = 0;  // fire time moved onto the step grid
  double max_snap = 0;             // s
  double shortfall = 0;            // J requested from an empty store
};

struct SimResult {
  std::string label;
  std::vector<SocSample> soc;
  std::vector<Event> events;
  Ledger ledger;
  SimStats stats;
  StorageState final_state;
  std::vector<std::string> warnings;

  EnvTrace soc_trace() const {
    std::vector<Sample> s;
    s.reserve(soc.size());
    for (const auto& x : soc) s.push_back({x.t, x.voltage});
    return EnvTrace(Quantity::voltage_V, std::move(s), label);
  }

  std::size_t count(EventKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [kind](const Event& e) { return e.kind == kind; }));
  }
};

namespace detail {

inline std::pair<double, double> coverage(const Environment& env) {
  return std::visit(
      [](const auto& e) -> std::pair<double, double> {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, DeltaTEnv>) return {e.delta_t.t_start(), e.delta_t.t_end()};
        else if constexpr (std::is_same_v<E, IrradianceEnv>) return {e.irradiance.t_start(), e.irradiance.t_end()};
        else return {std::max(e.water.t_start(), e.wall.t_start()), std::min(e.water.t_end(), e.wall.t_end())};
      },
      env);
}

inline double env_value(const Environment& env, double t) {
  return std::visit(
      [t](const auto& e) -> double {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, DeltaTEnv>) return e.delta_t.value_at(t);
        else if constexpr (std::is_same_v<E, IrradianceEnv>) return e.irradiance.value_at(t);
        else return e.water.value_at(t) - e.wall.value_at(t);
      },
      env);
}

}  // namespace detail

// Harvester, converter and environment must describe the same physical chain.
inline void check_pairing(const Harvester& h, const ConverterSpec& c) {
  if (std::holds_alternative<PvSpec>(h) && !c.is_mppt())
    throw Error(Errc::mismatch, "harvester '" + label_of(h) + "' is photovoltaic but converter '" + c.label +
                                    "' uses a fixed input impedance; PV needs an MPPT converter");
}

inline void check_environment(const Harvester& h, const Environment& env) {
  bool pv = std::holds_alternative<PvSpec>(h);
  bool irr = std::holds_alternative<IrradianceEnv>(env);
  if (pv != irr)
    throw Error(Errc::mismatch, pv ? "photovoltaic harvester needs an irradiance environment"
                                   : "thermoelectric harvester needs a temperature-difference environment");
  if (auto* d = std::get_if<DeltaTEnv>(&env); d && d->delta_t.quantity() != Quantity::temperature_difference_K)
    throw Error(Errc::mismatch, "delta-T environment trace must be a temperature difference");
  if (auto* p = std::get_if<TemperaturePairEnv>(&env);
      p && (p->water.quantity() != Quantity::temperature_K || p->wall.quantity() != Quantity::temperature_K))
    throw Error(Errc::mismatch, "temperature-pair environment needs absolute temperature traces");
  if (auto* i = std::get_if<IrradianceEnv>(&env); i && i->irradiance.quantity() != Quantity::irradiance_W_per_m2)
    throw Error(Errc::mismatch, "irradiance environment trace has the wrong quantity");
}

inline SourceOutput evaluate_source(const Harvester& h, double env_value) {
  if (auto* teg = std::get_if<TegSpec>(&h)) return teg_source(*teg, env_value);
  return pv_power(std::get<PvSpec>(h), env_value);
}

// Fixed-step simulation of harvester -> converter -> storage -> node.
// Converter output is integrated with the trapezoid rule between grid points;
// active cycles are withdrawn at the start of the step in which they fire, at
// most one per step, and only while the load switch is closed.
inline SimResult run(const SystemConfig& cfg) {
  validate(cfg.harvester);
  cfg.converter.validate();
  cfg.node.validate();
  // The converter's output ceiling caps the charge voltage.
  StorageSpec storage = cfg.storage;
  storage.v_max = std::min(storage.v_max, cfg.converter.v_out_max);
  storage.validate();
  check_pairing(cfg.harvester, cfg.converter);
  check_environment(cfg.harvester, cfg.env);
  if (!(cfg.step > 0)) throw Error(Errc::invalid, "step must be > 0");

  auto [cov_lo, cov_hi] = detail::coverage(cfg.env);
  const double t0 = cfg.t_start.value_or(cov_lo);
  const double t_end = cfg.t_end.value_or(cov_hi);
  if (t0 < cov_lo || t_end > cov_hi || !(t_end > t0))
    throw Error(Errc::invalid, "environment traces do not cover the simulation window");
  if (t_end - t0 < cfg.step) throw Error(Errc::invalid, "environment trace too short for one step");

  const double v0 = cfg.initial_voltage.value_or(storage.v_reconnect);
  if (!(v0 >= 0 && v0 <= storage.v_max))
    throw Error(Errc::invalid, "initial voltage outside storage limits");

  const auto n = static_cast<std::size_t>(std::floor((t_end - t0) / cfg.step * (1.0 + 1e-12)));
  const double dt = cfg.step;
  const double active_energy = active_cycle_energy(cfg.node);
  const bool energy_triggered = std::holds_alternative<EnergyTriggered>(cfg.node.schedule);

  SimResult res;
  res.label = cfg.label;
  res.soc.reserve(n + 1);

  struct Point {
    double available = 0, converted = 0, running = 0;
  };
  bool seen_pos = false, seen_neg = false;
  auto eval = [&](double t) {
    double e = detail::env_value(cfg.env, t);
    if (e > 0) seen_pos = true;
    if (e < 0) seen_neg = true;
    SourceOutput src = evaluate_source(cfg.harvester, e);
    return Point{src.p_available, converter_output(cfg.converter, src),
                 converter_active(cfg.converter, src) ? 1.0 : 0.0};
  };

  StorageState state{v0, v0 >= storage.v_reconnect, v0 < storage.v_destroy};
  const double e_start = energy_of(storage, v0);
  std::optional<double> next_due;
  if (!energy_triggered) next_due = next_fire(cfg.node.schedule, t0, 0, active_energy);

  double discarded_cum = 0;
  std::optional<Event> surplus;
  res.soc.push_back({t0, state.voltage, state.connected, 0});

  Point cur = eval(t0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    const double t_next = std::min(t0 + static_cast<double>(i + 1) * dt, t_end);
    const Point nxt = eval(t_next);

    bool fire = false;
    if (energy_triggered) {
      fire = state.connected &&
             next_fire(cfg.node.schedule, t, usable_energy(storage, state), active_energy).has_value();
    } else if (t >= *next_due - 1e-9 * dt) {
      if (state.connected) {
        fire = true;
        double snap = t - *next_due;
        if (snap > 1e-9 * dt) {
          ++res.stats.snapped_cycles;
          res.stats.max_snap = std::max(res.stats.max_snap, snap);
        }
      } else {
        ++res.stats.missed_cycles;
      }
      next_due = next_fire(cfg.node.schedule, t, usable_energy(storage, state), active_energy);
    }

    const double p_in = 0.5 * (cur.converted + nxt.converted);
    const double quiescent = cfg.converter.quiescent_power * 0.5 * (cur.running + nxt.running);
    // Standby is a whole-system figure measured at the storage terminals, so it
    // is drawn regardless of the load switch; only active cycles need the switch closed.
    const double standby = cfg.node.sleep_power;
    const double requested_parasitic = (storage.parasitic_power(state.voltage) + quiescent + standby) * dt;
    const auto out = step_storage(storage, state, p_in, fire ? active_energy / dt : 0.0, dt, quiescent + standby);
    const auto& r = out.report;

    const double drawn_fraction = requested_parasitic > 0 ? r.parasitic / requested_parasitic : 0.0;
    const double sleep_drawn = standby * dt * drawn_fraction;
    const double active_delivered = r.delivered;
    res.ledger.harvested += 0.5 * (cur.available + nxt.available) * dt;
    res.ledger.converted += r.energy_in;
    res.ledger.parasitic += r.parasitic - sleep_drawn;
    res.ledger.active += active_delivered;
    res.ledger.sleep += sleep_drawn;
    res.ledger.discarded += r.discarded;
    res.stats.shortfall += r.shortfall;
    discarded_cum += r.discarded;

    if (fire) {
      ++res.stats.cycles;
      res.events.push_back({t, EventKind::measure_tx, active_delivered});
    }
    if (r.discarded > 0) {
      if (!surplus) surplus = Event{t, EventKind::surplus_discard, 0};
      surplus->energy += r.discarded;
    } else if (surplus) {
      res.events.push_back(*surplus);
      surplus.reset();
    }
    if (r.disconnected) res.events.push_back({t_next, EventKind::disconnect, 0});
    if (r.reconnected) res.events.push_back({t_next, EventKind::reconnect, 0});
    if (r.destroyed) res.events.push_back({t_next, EventKind::destroyed, 0});

    state = out.state;
    res.soc.push_back({t_next, state.voltage, state.connected, discarded_cum});
    cur = nxt;
  }
  if (surplus) res.events.push_back(*surplus);
  std::stable_sort(res.events.begin(), res.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });

  res.ledger.delta_stored = energy_of(storage, state.voltage) - e_start;
  res.stats.steps = n;
  res.final_state = state;
  if (std::holds_alternative<TegSpec>(cfg.harvester) && seen_pos && seen_neg)
    res.warnings.push_back("temperature difference changes sign; polarity is folded into magnitude");
  if (res.stats.snapped_cycles > 0)
    res.warnings.push_back(std::to_string(res.stats.snapped_cycles) + " cycles snapped onto the step grid (max " +
                           csv::format_number(res.stats.max_snap) + " s)");
  return res;
}

struct LedgerCheck {
  bool ok = false;
  double residual = 0;  // relative
};

// E_converted = dE_stored + E_sleep + E_active + E_parasitic + E_discarded
inline LedgerCheck ledger_check(const SimResult& result, double tolerance = 1e-6) {
  const auto& l = result.ledger;
  double rhs = l.delta_stored + l.sleep + l.active + l.parasitic + l.discarded;
  double scale = std::max({std::abs(l.converted), std::abs(l.delta_stored) + l.sleep + l.active + l.parasitic + l.discarded});
  double residual = scale > 0 ? std::abs(l.converted - rhs) / scale : 0.0;
  return {residual < tolerance, residual};
}

// Independent configurations on up to `threads` workers; results keep config order.
inline std::vector<SimResult> run_batch(const std::vector<SystemConfig>& configs, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, configs.size())));
  std::vector<std::optional<SimResult>> slots(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        slots[i] = run(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<SimResult> out;
  out.reserve(configs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace harvestsim
