#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "harvestsim/error.hpp"
#include "harvestsim/traces.hpp"

namespace harvestsim {

// Thermoelectric generator. seebeck in V/K, r_internal in ohm; quality_factor is
// the share of the media temperature difference that appears across the module.
struct TegSpec {
  std::string label = "teg";
  double seebeck = 0;
  double r_internal = 0;
  double quality_factor = 1;

  void validate() const {
    if (!(seebeck > 0)) throw Error(Errc::invalid, label + ": seebeck must be > 0");
    if (!(r_internal > 0)) throw Error(Errc::invalid, label + ": r_internal must be > 0");
    if (!(quality_factor > 0 && quality_factor <= 1))
      throw Error(Errc::invalid, label + ": quality_factor must be in (0, 1]");
  }
};

struct KPoint {
  double irradiance = 0;  // W/m^2
  double k = 0;           // W per W/m^2
};

// Photovoltaic cell at its maximum power point, linear in irradiance.
struct PvSpec {
  std::string label = "pv";
  double area_mm2 = 0;
  double coefficient_k = 0;  // W per (W/m^2) at the installed location
  double mpp_voltage = 1.0;  // only used for converter input-window checks
  std::vector<KPoint> k_table;  // optional k(G); overrides coefficient_k when non-empty

  void validate() const {
    if (!(area_mm2 > 0)) throw Error(Errc::invalid, label + ": area must be > 0");
    if (!(coefficient_k >= 0)) throw Error(Errc::invalid, label + ": coefficient_k must be >= 0");
    if (!(mpp_voltage > 0)) throw Error(Errc::invalid, label + ": mpp_voltage must be > 0");
    for (std::size_t i = 0; i < k_table.size(); ++i) {
      if (k_table[i].k < 0) throw Error(Errc::invalid, label + ": k_table entries must be >= 0");
      if (i > 0 && !(k_table[i].irradiance > k_table[i - 1].irradiance))
        throw Error(Errc::invalid, label + ": k_table irradiance axis must be strictly increasing");
    }
  }

  double k_at(double irradiance) const {
    if (k_table.empty()) return coefficient_k;
    if (irradiance <= k_table.front().irradiance) return k_table.front().k;
    if (irradiance >= k_table.back().irradiance) return k_table.back().k;
    auto hi = std::upper_bound(k_table.begin(), k_table.end(), irradiance,
                               [](double g, const KPoint& p) { return g < p.irradiance; });
    auto lo = std::prev(hi);
    double f = (irradiance - lo->irradiance) / (hi->irradiance - lo->irradiance);
    return lo->k + f * (hi->k - lo->k);
  }
};

using Harvester = std::variant<TegSpec, PvSpec>;

inline const std::string& label_of(const Harvester& h) {
  return std::visit([](const auto& s) -> const std::string& { return s.label; }, h);
}

inline void validate(const Harvester& h) {
  std::visit([](const auto& s) { s.validate(); }, h);
}

// Electrical view of a harvester at one instant.
struct SourceOutput {
  double v_oc = 0;         // V
  double p_available = 0;  // W, at matched load / MPP
  double v_operating = 0;  // V at the maximum power point
  std::optional<double> r_source;  // ohm; set for resistive sources (TEG)
};

inline SourceOutput teg_source(const TegSpec& spec, double dT_media) {
  double v_oc = spec.seebeck * spec.quality_factor * std::abs(dT_media);
  return {v_oc, v_oc * v_oc / (4.0 * spec.r_internal), v_oc / 2.0, spec.r_internal};
}

// Power into a resistive load from its measured voltage. Approximates the matched
// available power when r_load is close to the generator's internal resistance.
inline double teg_power_from_load_voltage(double v_load, double r_load) {
  if (!(r_load > 0)) throw Error(Errc::invalid, "load resistance must be > 0");
  return v_load * v_load / r_load;
}

inline SourceOutput pv_power(const PvSpec& spec, double irradiance) {
  if (irradiance < 0) throw Error(Errc::invalid, "irradiance must be >= 0");
  return {spec.mpp_voltage, spec.k_at(irradiance) * irradiance, spec.mpp_voltage, std::nullopt};
}

struct PvCalibration {
  double k = 0;             // W per W/m^2
  double residual_rms = 0;  // W
  std::size_t samples = 0;
  double overlap_s = 0;
};

// Through-origin least-squares slope of cell power against irradiance.
inline PvCalibration calibrate_pv(const AlignedPair& pair) {
  if (pair.a.quantity() != Quantity::power_W || pair.b.quantity() != Quantity::irradiance_W_per_m2)
    throw Error(Errc::mismatch, "calibration needs (power_W, irradiance_W_per_m2) traces");
  if (!(pair.t_end > pair.t_start) || pair.a.size() < 2)
    throw Error(Errc::degenerate, "overlap shorter than one sample");
  double sgp = 0, sgg = 0;
  for (std::size_t i = 0; i < pair.a.size(); ++i) {
    double p = pair.a[i].value, g = pair.b[i].value;
    sgp += g * p;
    sgg += g * g;
  }
  if (!(sgg > 0)) throw Error(Errc::degenerate, "degenerate calibration: irradiance is zero throughout");
  double k = sgp / sgg;
  double sse = 0;
  for (std::size_t i = 0; i < pair.a.size(); ++i) {
    double r = pair.a[i].value - k * pair.b[i].value;
    sse += r * r;
  }
  return {k, std::sqrt(sse / static_cast<double>(pair.a.size())), pair.a.size(), pair.t_end - pair.t_start};
}

struct QualityFactor {
  double ratio = 0;  // |dT_teg| / |dT_media|, unclamped
  double value = 0;  // ratio clamped to 1
  bool exceeds_unity = false;
};

inline QualityFactor teg_quality_factor(double dT_teg, double dT_media) {
  if (dT_media == 0) throw Error(Errc::invalid, "media temperature difference must be non-zero");
  double ratio = std::abs(dT_teg) / std::abs(dT_media);
  return {ratio, std::min(ratio, 1.0), ratio > 1.0};
}

}  // namespace harvestsim
