#pragma once

// Synthetic traces and independent oracles shared by the test suites. Nothing
// here calls into the model code paths it is used to check.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "harvestsim/traces.hpp"
#include "harvestsim/units.hpp"

namespace fixtures {

using harvestsim::EnvTrace;
using harvestsim::Quantity;
using harvestsim::Sample;

inline constexpr double kYear = 365.0 * 86400.0;
inline constexpr double kDay = 86400.0;

// 2023-01-01T00:00:00Z, so monthly breakdowns line up with calendar months.
inline constexpr double kEpoch2023 = 1672531200.0;

inline EnvTrace generate(Quantity q, double t0, double t1, double step, const std::function<double(double)>& f) {
  std::vector<Sample> s;
  auto n = static_cast<std::size_t>(std::llround((t1 - t0) / step));
  s.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    double t = t0 + static_cast<double>(i) * step;
    s.push_back({t, f(t - t0)});
  }
  return EnvTrace(q, std::move(s));
}

inline EnvTrace constant(Quantity q, double value, double t0, double t1, double step) {
  return generate(q, t0, t1, step, [value](double) { return value; });
}

// Daylight half of each day follows a sine, zero at night.
inline double half_sine(double peak, double t) {
  double phase = std::fmod(t, kDay) / kDay;
  return phase < 0.5 ? peak * std::sin(2.0 * std::numbers::pi * phase) : 0.0;
}

// Closed form: integral of peak*sin over the daylight half-day.
inline double half_sine_daily_integral(double peak) { return peak * kDay / std::numbers::pi; }

// Unscaled annual temperature-difference shape in [0.1, 1]: seasonal plus daily swing.
inline double teg_shape(double t) {
  return 0.55 + 0.30 * std::cos(2.0 * std::numbers::pi * t / kYear) + 0.15 * std::sin(2.0 * std::numbers::pi * t / kDay);
}

// Direct evaluation of the TEG -> impedance-matched booster chain for a flat
// efficiency. Written out longhand from the physics, not from the library.
struct TegChainOracle {
  double seebeck = 0.053;
  double quality = 0.073;
  double r_teg = 1.5;
  double r_in = 2.0;
  double eta = 0.5;
  double v_start = 0.005;

  double power(double dT) const {
    double v = seebeck * quality * std::abs(dT);
    if (v < v_start || v == 0) return 0.0;
    double matched = v * v / (4.0 * r_teg);
    double delivered_fraction = (4.0 * r_teg * r_in) / ((r_teg + r_in) * (r_teg + r_in));
    return matched * delivered_fraction * eta;
  }

  // Trapezoid over the samples, scaled to 365 d.
  double annual_energy(const EnvTrace& dT) const {
    double e = 0;
    auto s = dT.samples();
    for (std::size_t i = 1; i < s.size(); ++i)
      e += 0.5 * (power(s[i].value) + power(s[i - 1].value)) * (s[i].t - s[i - 1].t);
    return e * kYear / dT.span();
  }
};

// One-year delta-T trace with an 8 K maximum whose shape exponent is tuned by
// bisection so that the oracle chain collects `target_J` per year.
inline EnvTrace teg_year_trace(double target_J, const TegChainOracle& oracle = {}, double step = 600.0,
                               double peak_K = 8.0) {
  double max_shape = 0;
  for (double t = 0; t <= kYear; t += step) max_shape = std::max(max_shape, teg_shape(t));
  auto make = [&](double p) {
    return generate(Quantity::temperature_difference_K, kEpoch2023, kEpoch2023 + kYear, step,
                    [&](double t) { return peak_K * std::pow(teg_shape(t) / max_shape, p); });
  };
  double lo = 0.0, hi = 20.0;
  for (int i = 0; i < 100; ++i) {
    double mid = 0.5 * (lo + hi);
    if (oracle.annual_energy(make(mid)) > target_J) lo = mid;
    else hi = mid;
  }
  return make(0.5 * (lo + hi));
}

inline EnvTrace random_trace(Quantity q, std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dt(10.0, 300.0), val(lo, hi);
  std::vector<Sample> s;
  double t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back({t, val(rng)});
    t += dt(rng);
  }
  return EnvTrace(q, std::move(s));
}

inline std::string preset(const std::string& rel) { return std::string(HARVESTSIM_PRESET_DIR) + "/" + rel; }

}  // namespace fixtures
