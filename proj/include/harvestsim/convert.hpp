#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "harvestsim/error.hpp"
#include "harvestsim/harvest.hpp"

namespace harvestsim {

// Efficiency grid indexed by input voltage (V) and input power (W).
// eta[i][j] belongs to (v_in[i], p_in[j]).
struct EfficiencyTable {
  std::vector<double> v_in;
  std::vector<double> p_in;
  std::vector<std::vector<double>> eta;

  static EfficiencyTable flat(double eta) { return {{1.0}, {1e-6}, {{eta}}}; }

  void validate(const std::string& label) const {
    auto fail = [&](const std::string& m) { throw Error(Errc::invalid, label + ": " + m); };
    if (v_in.empty() || p_in.empty()) fail("efficiency table is empty");
    for (std::size_t i = 1; i < v_in.size(); ++i)
      if (!(v_in[i] > v_in[i - 1])) fail("efficiency v_in axis must be strictly increasing");
    for (std::size_t j = 0; j < p_in.size(); ++j) {
      if (!(p_in[j] > 0)) fail("efficiency p_in axis must be > 0");
      if (j > 0 && !(p_in[j] > p_in[j - 1])) fail("efficiency p_in axis must be strictly increasing");
    }
    if (eta.size() != v_in.size()) fail("efficiency grid needs one row per v_in value");
    for (const auto& row : eta) {
      if (row.size() != p_in.size()) fail("efficiency grid rows need one value per p_in value");
      for (double e : row)
        if (!(e >= 0 && e <= 1)) fail("efficiencies must lie in [0, 1]");
    }
  }
};

struct ImpedanceInput {
  double ohms = 0;
};

// Ideal maximum-power-point tracker with a multiplicative tracking loss.
struct MpptInput {
  double tracking_factor = 1.0;
};

using ConverterInput = std::variant<ImpedanceInput, MpptInput>;

struct ConverterSpec {
  std::string label = "converter";
  std::string provenance = "user";  // "published", "placeholder", "datasheet" or "user"
  double v_start = 0;               // V, minimum open-circuit input to run
  double v_in_max = 0;              // V
  ConverterInput input = MpptInput{};
  EfficiencyTable efficiency = EfficiencyTable::flat(1.0);
  double quiescent_power = 0;  // W, drawn from storage while running
  double v_out_max = 0;        // V, storage charge ceiling

  bool is_mppt() const { return std::holds_alternative<MpptInput>(input); }

  void validate() const {
    auto fail = [&](const std::string& m) { throw Error(Errc::invalid, label + ": " + m); };
    if (!(v_start >= 0)) fail("v_start must be >= 0");
    if (!(v_start < v_in_max)) fail("v_start must be below v_in_max");
    if (!(quiescent_power >= 0)) fail("quiescent_power must be >= 0");
    if (!(v_out_max > 0)) fail("v_out_max must be > 0");
    if (auto* z = std::get_if<ImpedanceInput>(&input); z && !(z->ohms > 0)) fail("input impedance must be > 0");
    if (auto* m = std::get_if<MpptInput>(&input); m && !(m->tracking_factor > 0 && m->tracking_factor <= 1))
      fail("tracking_factor must be in (0, 1]");
    efficiency.validate(label);
  }
};

// Fraction of the matched-load power a source of r_source delivers into r_input.
inline double transfer_factor(double r_source, double r_input) {
  if (!(r_source > 0 && r_input > 0)) throw Error(Errc::invalid, "resistances must be > 0");
  double sum = r_source + r_input;
  return 4.0 * r_source * r_input / (sum * sum);
}

namespace detail {

// Bracketing index and weight on a sorted axis, clamped to the ends.
inline std::pair<std::size_t, double> bracket(const std::vector<double>& axis, double x) {
  if (axis.size() == 1 || x <= axis.front()) return {0, 0.0};
  if (x >= axis.back()) return {axis.size() - 2, 1.0};
  auto hi = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), x) - axis.begin());
  std::size_t lo = hi - 1;
  return {lo, (x - axis[lo]) / (axis[hi] - axis[lo])};
}

}  // namespace detail

// Bilinear in (v_in, log10 p_in), clamped to the grid edges.
inline double interpolate_efficiency(const EfficiencyTable& t, double v_in, double p_in) {
  auto [i, fv] = detail::bracket(t.v_in, v_in);
  std::vector<double> log_p(t.p_in.size());
  std::transform(t.p_in.begin(), t.p_in.end(), log_p.begin(), [](double p) { return std::log10(p); });
  double lp = p_in > 0 ? std::log10(p_in) : log_p.front();
  auto [j, fp] = detail::bracket(log_p, lp);
  std::size_t i1 = std::min(i + 1, t.v_in.size() - 1);
  std::size_t j1 = std::min(j + 1, t.p_in.size() - 1);
  double e0 = t.eta[i][j] + fp * (t.eta[i][j1] - t.eta[i][j]);
  double e1 = t.eta[i1][j] + fp * (t.eta[i1][j1] - t.eta[i1][j]);
  return std::clamp(e0 + fv * (e1 - e0), 0.0, 1.0);
}

inline double interpolate_efficiency(const ConverterSpec& spec, double v_in, double p_in) {
  return interpolate_efficiency(spec.efficiency, v_in, p_in);
}

// Running means the input clears the cold-start threshold and carries power.
inline bool converter_active(const ConverterSpec& spec, const SourceOutput& src) {
  return src.v_oc >= spec.v_start && src.p_available > 0;
}

// Power delivered to the storage side, before quiescent draw.
inline double converter_output(const ConverterSpec& spec, const SourceOutput& src) {
  if (src.v_oc > spec.v_in_max)
    throw Error(Errc::over_voltage, spec.label + ": input " + csv::format_number(src.v_oc) +
                                        " V exceeds v_in_max " + csv::format_number(spec.v_in_max) + " V");
  if (!converter_active(spec, src)) return 0.0;
  double p_in = 0, v_in = 0;
  if (auto* z = std::get_if<ImpedanceInput>(&spec.input)) {
    if (!src.r_source) throw Error(Errc::mismatch, spec.label + ": impedance-mode converter needs a resistive source");
    p_in = src.p_available * transfer_factor(*src.r_source, z->ohms);
    v_in = src.v_oc * z->ohms / (*src.r_source + z->ohms);
  } else {
    p_in = src.p_available * std::get<MpptInput>(spec.input).tracking_factor;
    v_in = src.v_operating;
  }
  return std::max(0.0, p_in * interpolate_efficiency(spec, v_in, p_in));
}

}  // namespace harvestsim
