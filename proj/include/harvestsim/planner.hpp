#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "harvestsim/convert.hpp"
#include "harvestsim/engine.hpp"
#include "harvestsim/harvest.hpp"
#include "harvestsim/node.hpp"
#include "harvestsim/timestamp.hpp"
#include "harvestsim/traces.hpp"
#include "harvestsim/units.hpp"

namespace harvestsim {

struct ExtrapolationOptions {
  double align_step = 60.0;     // s, grid for reference calibration
  double min_span_days = 360.0; // shorter annual traces are scaled with a warning
};

struct AnnualExtrapolation {
  Harvester harvester;  // after calibration against the reference
  double energy_year = 0;  // J converted per 365 d
  std::array<double, 12> monthly{};  // J, same scaling as energy_year
  double span_s = 0;
  double scale = 1;  // 365 d / span
  std::optional<PvCalibration> pv_calibration;
  std::optional<double> fitted_quality_factor;
  std::vector<std::string> warnings;
};

namespace detail {

inline double fit_quality_factor(const TegSpec& teg, const EnvTrace& reference, const EnvTrace& media,
                                 double step, std::vector<std::string>& warnings) {
  auto pair = align(reference, media, step);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < pair.a.size(); ++i) {
    double x = std::abs(pair.b[i].value);
    double y = std::abs(pair.a[i].value);
    if (reference.quantity() == Quantity::voltage_V) x *= teg.seebeck;
    sxy += x * y;
    sxx += x * x;
  }
  if (!(sxx > 0)) throw Error(Errc::degenerate, "degenerate calibration: media temperature difference is zero");
  double q = sxy / sxx;
  if (q > 1) {
    warnings.push_back("fitted quality factor " + csv::format_number(q) + " exceeds 1; clamped to 1");
    q = 1;
  }
  if (!(q > 0)) throw Error(Errc::degenerate, "degenerate calibration: reference signal is zero");
  return q;
}

}  // namespace detail

// Project converted energy to one year. The reference trace, when given, calibrates
// the harvester first: measured cell power (PV) or the TEG voltage / temperature drop
// at the module (TEG). The annual trace is then pushed through harvester and
// converter and integrated with the trapezoid rule.
inline AnnualExtrapolation extrapolate_annual(const std::optional<EnvTrace>& reference, const EnvTrace& annual_env,
                                              Harvester harvester, const ConverterSpec& converter,
                                              const ExtrapolationOptions& opt = {}) {
  AnnualExtrapolation out;
  converter.validate();
  check_pairing(harvester, converter);
  if (auto* pv = std::get_if<PvSpec>(&harvester)) {
    if (annual_env.quantity() != Quantity::irradiance_W_per_m2)
      throw Error(Errc::mismatch, "photovoltaic extrapolation needs an irradiance trace");
    if (reference) {
      if (reference->quantity() != Quantity::power_W)
        throw Error(Errc::mismatch, "photovoltaic reference must be measured cell power");
      auto cal = calibrate_pv(align(*reference, annual_env, opt.align_step));
      pv->coefficient_k = cal.k;
      pv->k_table.clear();
      out.pv_calibration = cal;
    }
  } else {
    auto& teg = std::get<TegSpec>(harvester);
    if (annual_env.quantity() != Quantity::temperature_difference_K)
      throw Error(Errc::mismatch, "thermoelectric extrapolation needs a temperature-difference trace");
    if (reference) {
      if (reference->quantity() != Quantity::voltage_V &&
          reference->quantity() != Quantity::temperature_difference_K)
        throw Error(Errc::mismatch, "thermoelectric reference must be TEG voltage or TEG temperature difference");
      teg.quality_factor = detail::fit_quality_factor(teg, *reference, annual_env, opt.align_step, out.warnings);
      out.fitted_quality_factor = teg.quality_factor;
    }
  }
  validate(harvester);

  auto s = annual_env.samples();
  std::vector<double> p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = converter_output(converter, evaluate_source(harvester, s[i].value));
  double total = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    double e = 0.5 * (p[i] + p[i - 1]) * (s[i].t - s[i - 1].t);
    total += e;
    out.monthly[month_of(0.5 * (s[i].t + s[i - 1].t)) - 1] += e;
  }
  out.span_s = annual_env.span();
  out.scale = kYearSeconds / out.span_s;
  if (out.span_s < opt.min_span_days * kDaySeconds)
    out.warnings.push_back("annual trace spans only " + csv::format_number(out.span_s / kDaySeconds) +
                           " days; energy scaled linearly to 365 days");
  out.energy_year = total * out.scale;
  for (auto& m : out.monthly) m *= out.scale;
  out.harvester = std::move(harvester);
  return out;
}

struct AnnualEstimate {
  std::string config_label;
  std::optional<double> quality_factor;  // TEG sweep rows only
  double energy_harvest_year = 0;
  double energy_sleep_year = 0;  // minimum energy for the inactive phase
  double energy_available = 0;
  double active_energy = 0;
  std::uint64_t n_cycles = 0;
  double interval_s = 0;  // 0 when no cycle fits
  bool feasible = false;
  double weekly_budget = 0;
  double weekly_buffer = 0;  // weekly budget minus one active cycle
};

inline double interval_for_cycles(std::uint64_t n_cycles) {
  return n_cycles > 0 ? kYearSeconds / static_cast<double>(n_cycles) : 0.0;
}

inline AnnualEstimate energy_balance(double energy_harvest_year, const NodeSpec& node, std::string label = {}) {
  if (!(energy_harvest_year >= 0)) throw Error(Errc::invalid, "annual harvest must be >= 0");
  AnnualEstimate e;
  e.config_label = std::move(label);
  e.energy_harvest_year = energy_harvest_year;
  e.energy_sleep_year = sleep_energy(node, kYearSeconds);
  e.energy_available = std::max(0.0, energy_harvest_year - e.energy_sleep_year);
  e.active_energy = active_cycle_energy(node);
  e.n_cycles = static_cast<std::uint64_t>(std::floor(e.energy_available / e.active_energy * (1.0 + 1e-12)));
  e.interval_s = interval_for_cycles(e.n_cycles);
  e.feasible = energy_harvest_year >= e.energy_sleep_year;
  e.weekly_budget = e.energy_available / kWeeksPerYear;
  e.weekly_buffer = e.weekly_budget - e.active_energy;
  return e;
}

struct SweepEnvironment {
  std::optional<EnvTrace> delta_t;     // for thermoelectric rows
  std::optional<EnvTrace> irradiance;  // for photovoltaic rows
};

struct SweepResult {
  std::vector<AnnualEstimate> rows;  // descending E_harvest, ties in input order
  std::vector<std::string> skipped;  // illegal or unsupported combinations
};

// Cartesian product harvesters x converters (x quality factors for TEG rows).
// An empty quality grid evaluates each TEG at its own quality factor.
inline SweepResult sweep(const std::vector<Harvester>& harvesters, const std::vector<ConverterSpec>& converters,
                         const std::vector<double>& quality_grid, const SweepEnvironment& env, const NodeSpec& node,
                         unsigned threads = 0) {
  if (harvesters.empty() || converters.empty()) throw Error(Errc::invalid, "sweep axes must be non-empty");
  node.validate();
  struct Job {
    Harvester h;
    const ConverterSpec* c;
    const EnvTrace* env;
    std::optional<double> q;
  };
  SweepResult result;
  std::vector<Job> jobs;
  for (const auto& h : harvesters) {
    bool pv = std::holds_alternative<PvSpec>(h);
    const EnvTrace* e = pv ? (env.irradiance ? &*env.irradiance : nullptr) : (env.delta_t ? &*env.delta_t : nullptr);
    for (const auto& c : converters) {
      std::string name = label_of(h) + "+" + c.label;
      if (pv && !c.is_mppt()) {
        result.skipped.push_back(name + ": photovoltaic source needs an MPPT converter");
        continue;
      }
      if (!e) {
        result.skipped.push_back(name + (pv ? ": no irradiance trace" : ": no temperature-difference trace"));
        continue;
      }
      if (pv || quality_grid.empty()) {
        jobs.push_back({h, &c, e, pv ? std::nullopt : std::optional(std::get<TegSpec>(h).quality_factor)});
        continue;
      }
      for (double q : quality_grid) {
        Harvester hq = h;
        std::get<TegSpec>(hq).quality_factor = q;
        jobs.push_back({std::move(hq), &c, e, q});
      }
    }
  }

  std::vector<AnnualEstimate> rows(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto& j = jobs[i];
        auto ex = extrapolate_annual(std::nullopt, *j.env, j.h, *j.c);
        rows[i] = energy_balance(ex.energy_year, node, label_of(j.h) + "+" + j.c->label);
        rows[i].quality_factor = j.q;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < threads && k < jobs.size(); ++k) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::stable_sort(rows.begin(), rows.end(), [](const AnnualEstimate& a, const AnnualEstimate& b) {
    return a.energy_harvest_year > b.energy_harvest_year;
  });
  result.rows = std::move(rows);
  return result;
}

}  // namespace harvestsim
