#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "harvestsim/error.hpp"

namespace harvestsim {

struct FixedInterval {
  double interval = 0;  // s
};

// Fires as soon as the usable stored energy covers one active cycle.
struct EnergyTriggered {};

struct WetWindow {
  double t_start = 0;
  double t_end = 0;  // exclusive
};

// Dense sampling during rain (wet windows), relaxed cadence otherwise.
struct Adaptive {
  double dry_interval = 0;
  double wet_interval = 0;
  std::vector<WetWindow> wet_windows;
};

using SchedulePolicy = std::variant<FixedInterval, EnergyTriggered, Adaptive>;

inline void validate(const SchedulePolicy& policy) {
  if (auto* f = std::get_if<FixedInterval>(&policy); f && !(f->interval > 0))
    throw Error(Errc::invalid, "fixed interval must be > 0");
  if (auto* a = std::get_if<Adaptive>(&policy)) {
    if (!(a->dry_interval > 0 && a->wet_interval > 0))
      throw Error(Errc::invalid, "adaptive intervals must be > 0");
    for (std::size_t i = 0; i < a->wet_windows.size(); ++i) {
      const auto& w = a->wet_windows[i];
      if (!(w.t_end > w.t_start)) throw Error(Errc::invalid, "wet window must have t_end > t_start");
      if (i > 0 && w.t_start < a->wet_windows[i - 1].t_end)
        throw Error(Errc::invalid, "wet windows must be sorted and non-overlapping");
    }
  }
}

struct Task {
  std::string name;
  double energy = 0;  // J
};

struct NodeSpec {
  std::string label = "node";
  double sleep_power = 0;  // W, inactive phase
  std::vector<Task> active_breakdown;
  SchedulePolicy schedule = EnergyTriggered{};

  void validate() const {
    if (!(sleep_power >= 0)) throw Error(Errc::invalid, label + ": sleep_power must be >= 0");
    if (active_breakdown.empty()) throw Error(Errc::invalid, label + ": active breakdown is empty");
    for (const auto& t : active_breakdown)
      if (!(t.energy > 0)) throw Error(Errc::invalid, label + ": task '" + t.name + "' energy must be > 0");
    harvestsim::validate(schedule);
  }
};

inline double active_cycle_energy(const NodeSpec& spec) {
  if (spec.active_breakdown.empty()) throw Error(Errc::invalid, spec.label + ": active breakdown is empty");
  return std::accumulate(spec.active_breakdown.begin(), spec.active_breakdown.end(), 0.0,
                         [](double acc, const Task& t) { return acc + t.energy; });
}

inline double sleep_energy(const NodeSpec& spec, double duration) {
  if (!(duration >= 0)) throw Error(Errc::invalid, "duration must be >= 0");
  return spec.sleep_power * duration;
}

namespace detail {

// Smallest multiple of interval strictly after t (or at/after t when !strict).
inline double next_multiple(double t, double interval, bool strict) {
  double k = strict ? std::floor(t / interval) + 1.0 : std::ceil(t / interval);
  double c = k * interval;
  if (strict && c <= t) c += interval;
  return c;
}

}  // namespace detail

// Next fire time. Interval policies return grid times strictly after now.
inline std::optional<double> next_fire(const SchedulePolicy& policy, double now, double usable,
                                       double active_energy) {
  if (auto* f = std::get_if<FixedInterval>(&policy)) return detail::next_multiple(now, f->interval, true);
  if (std::holds_alternative<EnergyTriggered>(policy)) {
    if (usable >= active_energy) return now;
    return std::nullopt;
  }
  const auto& a = std::get<Adaptive>(policy);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double t = now;
  bool strict = true;
  while (true) {
    bool wet = false;
    double seg_end = inf;
    for (const auto& w : a.wet_windows) {
      if (t < w.t_start) {
        seg_end = w.t_start;
        break;
      }
      if (t < w.t_end) {
        wet = true;
        seg_end = w.t_end;
        break;
      }
    }
    double c = detail::next_multiple(t, wet ? a.wet_interval : a.dry_interval, strict);
    if (c < seg_end) return c;
    t = seg_end;
    strict = false;
  }
}

}  // namespace harvestsim
