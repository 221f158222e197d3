#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "harvestsim/csv.hpp"
#include "harvestsim/error.hpp"
#include "harvestsim/timestamp.hpp"
#include "harvestsim/units.hpp"

namespace harvestsim {

enum class Quantity {
  temperature_K,
  temperature_difference_K,  // signed, e.g. wastewater minus channel wall
  irradiance_W_per_m2,
  voltage_V,
  power_W,
};

inline const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::temperature_K: return "temperature_K";
    case Quantity::temperature_difference_K: return "temperature_difference_K";
    case Quantity::irradiance_W_per_m2: return "irradiance_W_per_m2";
    case Quantity::voltage_V: return "voltage_V";
    case Quantity::power_W: return "power_W";
  }
  return "unknown";
}

struct Sample {
  double t = 0;  // seconds since the Unix epoch
  double value = 0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

// Immutable, validated time series of one physical quantity.
class EnvTrace {
 public:
  EnvTrace(Quantity quantity, std::vector<Sample> samples, std::string site_label = {})
      : quantity_(quantity), samples_(std::move(samples)), site_label_(std::move(site_label)) {
    validate();
  }

  Quantity quantity() const noexcept { return quantity_; }
  std::span<const Sample> samples() const noexcept { return samples_; }
  const std::string& site_label() const noexcept { return site_label_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double t_start() const noexcept { return samples_.front().t; }
  double t_end() const noexcept { return samples_.back().t; }
  double span() const noexcept { return t_end() - t_start(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  bool covers(double t) const noexcept { return t >= t_start() && t <= t_end(); }

  // Linear interpolation; t outside the trace is an error, no extrapolation.
  double value_at(double t) const {
    if (!covers(t))
      throw Error(Errc::invalid, "time " + csv::format_number(t) + " outside trace [" +
                                     csv::format_number(t_start()) + ", " +
                                     csv::format_number(t_end()) + "]");
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double x, const Sample& s) { return x < s.t; });
    if (it == samples_.end()) return samples_.back().value;
    auto hi = it;
    auto lo = std::prev(it);
    double frac = (t - lo->t) / (hi->t - lo->t);
    return lo->value + frac * (hi->value - lo->value);
  }

  // Last sample at or before t.
  double value_held(double t) const {
    if (!covers(t)) throw Error(Errc::invalid, "time outside trace");
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double x, const Sample& s) { return x < s.t; });
    return std::prev(it)->value;
  }

  friend bool operator==(const EnvTrace& a, const EnvTrace& b) {
    return a.quantity_ == b.quantity_ && a.samples_ == b.samples_;
  }

 private:
  void validate() const {
    if (samples_.size() < 2)
      throw Error(Errc::invalid, "trace needs at least 2 samples, got " + std::to_string(samples_.size()));
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& s = samples_[i];
      if (!std::isfinite(s.t) || !std::isfinite(s.value))
        throw Error(Errc::invalid, "non-finite sample at index " + std::to_string(i));
      if (i > 0 && !(s.t > samples_[i - 1].t))
        throw Error(Errc::invalid, "timestamps not strictly increasing at index " + std::to_string(i));
      switch (quantity_) {
        case Quantity::irradiance_W_per_m2:
        case Quantity::power_W:
          if (s.value < 0)
            throw Error(Errc::invalid, std::string(to_string(quantity_)) + " must be >= 0 at index " +
                                           std::to_string(i));
          break;
        case Quantity::temperature_K:
          if (s.value <= 0)
            throw Error(Errc::invalid, "absolute temperature must be > 0 K at index " + std::to_string(i));
          break;
        default:
          break;
      }
    }
  }

  Quantity quantity_;
  std::vector<Sample> samples_;
  std::string site_label_;
};

struct ParseOptions {
  std::string time_column = "t";
  std::string value_column = "v";
  bool celsius = false;      // convert value column from degC to K
  bool strict_gaps = false;  // reject gaps instead of warning
  double gap_factor = 10.0;  // gap threshold as a multiple of the median interval
  std::string site_label;
};

struct ParsedTrace {
  EnvTrace trace;
  std::vector<std::string> warnings;
};

struct Gap {
  double from = 0;
  double to = 0;
};

// Intervals longer than factor x the median sample interval.
inline std::vector<Gap> find_gaps(std::span<const Sample> s, double factor) {
  std::vector<Gap> gaps;
  if (s.size() < 3) return gaps;
  std::vector<double> dts;
  dts.reserve(s.size() - 1);
  for (std::size_t i = 1; i < s.size(); ++i) dts.push_back(s[i].t - s[i - 1].t);
  auto mid = dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2);
  std::vector<double> sorted = dts;
  std::nth_element(sorted.begin(), sorted.begin() + (mid - dts.begin()), sorted.end());
  double median = sorted[static_cast<std::size_t>(mid - dts.begin())];
  for (std::size_t i = 0; i < dts.size(); ++i)
    if (dts[i] > factor * median) gaps.push_back({s[i].t, s[i + 1].t});
  return gaps;
}

inline ParsedTrace parse_trace(std::istream& in, Quantity quantity, const ParseOptions& opt = {},
                               const std::string& source_name = "<stream>") {
  auto records = csv::read(in);
  if (records.empty()) throw Error(Errc::parse, source_name + ": no header row");
  const auto& header = records.front().fields;
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(Errc::parse, source_name + ": no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t tcol = column(opt.time_column);
  const std::size_t vcol = column(opt.value_column);

  std::vector<Sample> samples;
  samples.reserve(records.size() - 1);
  std::vector<std::size_t> bad_rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    std::optional<double> t, v;
    if (tcol < f.size()) t = parse_timestamp(f[tcol]);
    if (vcol < f.size()) v = csv::parse_number(f[vcol]);
    if (!t || !v || !std::isfinite(*v)) {
      bad_rows.push_back(records[r].line);
      continue;
    }
    samples.push_back({*t, opt.celsius ? *v + kCelsiusOffset : *v});
  }
  if (!bad_rows.empty()) {
    std::string rows;
    for (std::size_t i = 0; i < bad_rows.size() && i < 20; ++i)
      rows += (i ? ", " : "") + std::to_string(bad_rows[i]);
    if (bad_rows.size() > 20) rows += ", ...";
    throw Error(Errc::parse, source_name + ": unparseable rows at lines " + rows);
  }
  if (samples.empty()) throw Error(Errc::invalid, source_name + ": empty trace");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].t > samples[i - 1].t))
      throw Error(Errc::invalid, source_name + ": non-monotonic timestamps at data row " +
                                     std::to_string(i + 1));

  std::vector<std::string> warnings;
  for (const auto& g : find_gaps(samples, opt.gap_factor)) {
    std::string msg = source_name + ": gap from t=" + csv::format_number(g.from) + " to t=" +
                      csv::format_number(g.to);
    if (opt.strict_gaps) throw Error(Errc::invalid, msg + " exceeds the gap limit (strict mode)");
    warnings.push_back(msg + " bridged linearly");
  }
  return {EnvTrace(quantity, std::move(samples), opt.site_label), std::move(warnings)};
}

inline ParsedTrace parse_trace(const std::string& path, Quantity quantity, const ParseOptions& opt = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open trace file '" + path + "'");
  return parse_trace(in, quantity, opt, path);
}

inline void write_trace(std::ostream& out, const EnvTrace& trace, const std::string& time_column = "t",
                        const std::string& value_column = "v") {
  csv::write_row(out, {time_column, value_column});
  for (const auto& s : trace.samples())
    csv::write_row(out, {csv::format_number(s.t), csv::format_number(s.value)});
}

enum class ResampleMethod { linear, hold };

// Grid t_start, t_start + step, ... up to t_end; never past the last sample.
inline std::vector<double> make_grid(double t_start, double t_end, double step) {
  std::vector<double> grid;
  auto n = static_cast<std::size_t>(std::floor((t_end - t_start) / step * (1.0 + 1e-12)));
  grid.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(std::min(t_start + static_cast<double>(i) * step, t_end));
  return grid;
}

inline EnvTrace resample_window(const EnvTrace& trace, double t_start, double t_end, double step,
                                ResampleMethod method) {
  if (!(step > 0)) throw Error(Errc::invalid, "resample step must be > 0");
  if (step > t_end - t_start)
    throw Error(Errc::invalid, "resample step " + csv::format_number(step) + " s exceeds span " +
                                   csv::format_number(t_end - t_start) + " s");
  std::vector<Sample> out;
  for (double t : make_grid(t_start, t_end, step))
    out.push_back({t, method == ResampleMethod::linear ? trace.value_at(t) : trace.value_held(t)});
  return EnvTrace(trace.quantity(), std::move(out), trace.site_label());
}

inline EnvTrace resample(const EnvTrace& trace, double step, ResampleMethod method = ResampleMethod::linear) {
  return resample_window(trace, trace.t_start(), trace.t_end(), step, method);
}

// Trapezoid integral over the whole trace (value unit x seconds).
inline double integrate(const EnvTrace& trace) {
  double sum = 0;
  auto s = trace.samples();
  for (std::size_t i = 1; i < s.size(); ++i) sum += 0.5 * (s[i].value + s[i - 1].value) * (s[i].t - s[i - 1].t);
  return sum;
}

struct AlignedPair {
  EnvTrace a;
  EnvTrace b;
  double t_start = 0;
  double t_end = 0;
  double step = 0;
};

inline AlignedPair align(const EnvTrace& a, const EnvTrace& b, double step) {
  double lo = std::max(a.t_start(), b.t_start());
  double hi = std::min(a.t_end(), b.t_end());
  if (!(hi > lo)) throw Error(Errc::no_overlap, "no temporal overlap");
  return {resample_window(a, lo, hi, step, ResampleMethod::linear),
          resample_window(b, lo, hi, step, ResampleMethod::linear), lo, hi, step};
}

}  // namespace harvestsim

namespace harvestsim {

// a - b on the shared grid of the overlap, e.g. wastewater minus channel wall.
inline EnvTrace difference_trace(const EnvTrace& a, const EnvTrace& b, double step) {
  auto pair = align(a, b, step);
  std::vector<Sample> out;
  out.reserve(pair.a.size());
  for (std::size_t i = 0; i < pair.a.size(); ++i) out.push_back({pair.a[i].t, pair.a[i].value - pair.b[i].value});
  return EnvTrace(Quantity::temperature_difference_K, std::move(out), a.site_label());
}

}  // namespace harvestsim
