#pragma once

// Loader for the JSON configuration files (comments allowed). Every physical
// number carries its unit in the key name, e.g. "v_start_mV": 5 or
// "sleep_power_uW": 4.5; the loader converts to SI and rejects bare numbers.
// See docs/config.md for the grammar.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "harvestsim/convert.hpp"
#include "harvestsim/csv.hpp"
#include "harvestsim/engine.hpp"
#include "harvestsim/error.hpp"
#include "harvestsim/harvest.hpp"
#include "harvestsim/node.hpp"
#include "harvestsim/store.hpp"
#include "harvestsim/timestamp.hpp"
#include "harvestsim/traces.hpp"

namespace harvestsim::config {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class Dim {
  voltage,
  power,
  energy,
  current,
  capacitance,
  resistance,
  time,
  temperature,
  seebeck,
  pv_coefficient,
  area_mm2,
  irradiance,
  ratio,
};

struct Unit {
  std::string_view suffix;
  double scale;  // to the internal unit
};

inline std::span<const Unit> units_for(Dim d) {
  static constexpr Unit voltage[] = {{"V", 1}, {"mV", 1e-3}, {"uV", 1e-6}};
  static constexpr Unit power[] = {{"W", 1}, {"mW", 1e-3}, {"uW", 1e-6}, {"nW", 1e-9}};
  static constexpr Unit energy[] = {{"J", 1}, {"kJ", 1e3}, {"mJ", 1e-3}, {"uJ", 1e-6}};
  static constexpr Unit current[] = {{"A", 1}, {"mA", 1e-3}, {"uA", 1e-6}, {"nA", 1e-9}};
  static constexpr Unit capacitance[] = {{"F", 1}, {"mF", 1e-3}, {"uF", 1e-6}};
  static constexpr Unit resistance[] = {{"ohm", 1}, {"kohm", 1e3}, {"mohm", 1e-3}};
  static constexpr Unit time[] = {{"s", 1}, {"min", 60}, {"h", 3600}, {"d", 86400}};
  static constexpr Unit temperature[] = {{"K", 1}};
  static constexpr Unit seebeck[] = {{"V_per_K", 1}, {"mV_per_K", 1e-3}, {"uV_per_K", 1e-6}};
  static constexpr Unit pv_coefficient[] = {
      {"W_per_W_m2", 1}, {"mW_per_W_m2", 1e-3}, {"uW_per_W_m2", 1e-6}};
  static constexpr Unit area[] = {{"mm2", 1}, {"cm2", 100}, {"m2", 1e6}};
  static constexpr Unit irradiance[] = {{"W_m2", 1}};
  static constexpr Unit ratio[] = {{"frac", 1}, {"pct", 0.01}};
  switch (d) {
    case Dim::voltage: return voltage;
    case Dim::power: return power;
    case Dim::energy: return energy;
    case Dim::current: return current;
    case Dim::capacitance: return capacitance;
    case Dim::resistance: return resistance;
    case Dim::time: return time;
    case Dim::temperature: return temperature;
    case Dim::seebeck: return seebeck;
    case Dim::pv_coefficient: return pv_coefficient;
    case Dim::area_mm2: return area;
    case Dim::irradiance: return irradiance;
    case Dim::ratio: return ratio;
  }
  return {};
}

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw Error(Errc::parse, where + ": " + what);
}

// A JSON object plus bookkeeping of which keys were read, so that typos and
// unit-less numbers surface as errors instead of silently using defaults.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  bool has_quantity(const std::string& base, Dim dim) const { return find_unit_key(base, dim).has_value(); }

  double quantity(const std::string& base, Dim dim) {
    auto v = optional_quantity(base, dim);
    if (!v) fail(path_, "missing '" + base + "_<unit>' (" + unit_list(dim) + ")");
    return *v;
  }

  double quantity_or(const std::string& base, Dim dim, double fallback) {
    return optional_quantity(base, dim).value_or(fallback);
  }

  std::optional<double> optional_quantity(const std::string& base, Dim dim) {
    reject_bare(base);
    auto hit = find_unit_key(base, dim);
    if (!hit) return std::nullopt;
    const auto& v = obj_.at(hit->first);
    if (!v.is_number()) fail(path_, "'" + hit->first + "' must be a number");
    consumed_.insert(hit->first);
    return v.get<double>() * hit->second;
  }

  std::vector<double> quantity_array(const std::string& base, Dim dim) {
    reject_bare(base);
    auto hit = find_unit_key(base, dim);
    if (!hit) fail(path_, "missing '" + base + "_<unit>' array (" + unit_list(dim) + ")");
    const auto& v = obj_.at(hit->first);
    if (!v.is_array()) fail(path_, "'" + hit->first + "' must be an array");
    consumed_.insert(hit->first);
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(path_, "'" + hit->first + "' must contain numbers");
      out.push_back(x.get<double>() * hit->second);
    }
    return out;
  }

  std::vector<std::vector<double>> quantity_matrix(const std::string& base, Dim dim) {
    reject_bare(base);
    auto hit = find_unit_key(base, dim);
    if (!hit) fail(path_, "missing '" + base + "_<unit>' grid (" + unit_list(dim) + ")");
    const auto& v = obj_.at(hit->first);
    consumed_.insert(hit->first);
    std::vector<std::vector<double>> out;
    if (!v.is_array()) fail(path_, "'" + hit->first + "' must be an array of rows");
    for (const auto& row : v) {
      if (!row.is_array()) fail(path_, "'" + hit->first + "' must be an array of rows");
      auto& r = out.emplace_back();
      for (const auto& x : row) {
        if (!x.is_number()) fail(path_, "'" + hit->first + "' must contain numbers");
        r.push_back(x.get<double>() * hit->second);
      }
    }
    return out;
  }

  std::string text(const std::string& key) {
    auto v = optional_text(key);
    if (!v) fail(path_, "missing text field '" + key + "'");
    return *v;
  }

  std::optional<std::string> optional_text(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& v = obj_.at(key);
    if (!v.is_string()) fail(path_, "'" + key + "' must be a string");
    consumed_.insert(key);
    return v.get<std::string>();
  }

  std::optional<bool> optional_flag(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) fail(path_, "'" + key + "' must be true or false");
    consumed_.insert(key);
    return v.get<bool>();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) fail(path_, "missing '" + key + "'");
    consumed_.insert(key);
    return obj_.at(key);
  }

  Section child(const std::string& key) { return Section(raw(key), path_ + "." + key); }

  // Every key must have been read.
  void finish() const {
    for (const auto& [k, v] : obj_.items())
      if (!consumed_.count(k)) {
        if (v.is_number()) fail(path_, "unknown or unit-less numeric key '" + k + "'");
        fail(path_, "unknown key '" + k + "'");
      }
  }

 private:
  std::optional<std::pair<std::string, double>> find_unit_key(const std::string& base, Dim dim) const {
    std::optional<std::pair<std::string, double>> hit;
    for (const auto& u : units_for(dim)) {
      std::string key = base + "_" + std::string(u.suffix);
      if (obj_.contains(key)) {
        if (hit) fail(path_, "both '" + hit->first + "' and '" + key + "' given");
        hit = std::pair{key, u.scale};
      }
    }
    return hit;
  }

  void reject_bare(const std::string& base) const {
    if (obj_.contains(base)) fail(path_, "'" + base + "' needs a unit suffix, e.g. '" + base + "_<unit>'");
  }

  static std::string unit_list(Dim dim) {
    std::string s;
    for (const auto& u : units_for(dim)) s += (s.empty() ? "" : ", ") + std::string(u.suffix);
    return s;
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> consumed_;
};

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
}

// Where "preset" references are looked up: the referencing file's directory,
// then each configured preset directory.
struct Resolver {
  std::vector<fs::path> preset_dirs;

  fs::path find(const std::string& ref, const fs::path& base_dir) const {
    fs::path p(ref);
    if (p.is_absolute()) {
      if (fs::exists(p)) return p;
    } else {
      if (fs::exists(base_dir / p)) return base_dir / p;
      for (const auto& d : preset_dirs)
        if (fs::exists(d / p)) return d / p;
    }
    throw Error(Errc::io, "preset '" + ref + "' not found");
  }
};

// Expand {"preset": "converters/em8900.json", ...overrides} into a plain object.
inline json expand_preset(const json& node, const fs::path& base_dir, const Resolver& resolver,
                          std::vector<std::string>* sources = nullptr, int depth = 0) {
  if (!node.is_object() || !node.contains("preset")) return node;
  if (depth > 8) throw Error(Errc::parse, "preset references nest too deeply");
  if (!node.at("preset").is_string()) throw Error(Errc::parse, "'preset' must be a path string");
  fs::path file = resolver.find(node.at("preset").get<std::string>(), base_dir);
  if (sources) sources->push_back(file.string());
  json base = expand_preset(read_json_file(file), file.parent_path(), resolver, sources, depth + 1);
  json patch = node;
  patch.erase("preset");
  base.merge_patch(patch);
  return base;
}

inline Harvester load_harvester(Section s) {
  auto type = s.text("type");
  Harvester out;
  if (type == "teg") {
    TegSpec t;
    t.label = s.optional_text("label").value_or("teg");
    t.seebeck = s.quantity("seebeck", Dim::seebeck);
    t.r_internal = s.quantity("r_internal", Dim::resistance);
    t.quality_factor = s.quantity("quality_factor", Dim::ratio);
    out = t;
  } else if (type == "pv") {
    PvSpec p;
    p.label = s.optional_text("label").value_or("pv");
    p.area_mm2 = s.quantity("area", Dim::area_mm2);
    p.coefficient_k = s.quantity_or("coefficient_k", Dim::pv_coefficient, 0.0);
    p.mpp_voltage = s.quantity_or("mpp_voltage", Dim::voltage, 1.0);
    if (s.has("k_table")) {
      const auto& arr = s.raw("k_table");
      if (!arr.is_array()) fail(s.path(), "'k_table' must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section e(arr[i], s.path() + ".k_table[" + std::to_string(i) + "]");
        p.k_table.push_back({e.quantity("irradiance", Dim::irradiance), e.quantity("k", Dim::pv_coefficient)});
        e.finish();
      }
    }
    out = p;
  } else {
    fail(s.path(), "harvester type must be 'teg' or 'pv', got '" + type + "'");
  }
  s.optional_text("provenance");
  s.optional_text("note");
  s.finish();
  validate(out);
  return out;
}

inline EfficiencyTable load_efficiency(Section s) {
  EfficiencyTable t;
  if (auto flat = s.optional_quantity("flat_eta", Dim::ratio)) {
    t = EfficiencyTable::flat(*flat);
  } else {
    t.v_in = s.quantity_array("v_in", Dim::voltage);
    t.p_in = s.quantity_array("p_in", Dim::power);
    t.eta = s.quantity_matrix("eta", Dim::ratio);
  }
  s.optional_text("note");
  s.finish();
  return t;
}

inline ConverterSpec load_converter(Section s) {
  ConverterSpec c;
  c.label = s.text("label");
  c.provenance = s.optional_text("provenance").value_or("user");
  c.v_start = s.quantity("v_start", Dim::voltage);
  c.v_in_max = s.quantity("v_in_max", Dim::voltage);
  auto mode = s.optional_text("mode").value_or("impedance");
  if (mode == "mppt") {
    c.input = MpptInput{s.quantity_or("tracking_factor", Dim::ratio, 1.0)};
  } else if (mode == "impedance") {
    c.input = ImpedanceInput{s.quantity("input_impedance", Dim::resistance)};
  } else {
    fail(s.path(), "mode must be 'impedance' or 'mppt'");
  }
  c.quiescent_power = s.quantity_or("quiescent_power", Dim::power, 0.0);
  c.v_out_max = s.quantity("v_out_max", Dim::voltage);
  c.efficiency = load_efficiency(s.child("efficiency"));
  s.optional_text("note");
  s.finish();
  c.validate();
  return c;
}

inline StorageSpec load_storage(Section s) {
  StorageSpec st;
  st.label = s.optional_text("label").value_or("storage");
  st.capacitance = s.quantity("capacitance", Dim::capacitance);
  st.v_max = s.quantity("v_max", Dim::voltage);
  st.v_destroy = s.quantity("v_destroy", Dim::voltage);
  st.v_disconnect = s.quantity("v_disconnect", Dim::voltage);
  st.v_reconnect = s.quantity("v_reconnect", Dim::voltage);
  st.protection_current = s.quantity_or("protection_current", Dim::current, 0.0);
  st.switch_leakage_current = s.quantity_or("switch_leakage_current", Dim::current, 0.0);
  st.self_discharge_power = s.quantity_or("self_discharge_power", Dim::power, 0.0);
  s.optional_text("provenance");
  s.optional_text("note");
  s.finish();
  st.validate();
  return st;
}

inline std::optional<double> read_instant(Section& s, const std::string& base) {
  if (s.has(base)) {
    const auto& v = s.raw(base);
    if (!v.is_string()) fail(s.path(), "'" + base + "' must be an ISO-8601 string; use '" + base + "_s' for epoch seconds");
    auto t = parse_timestamp(v.get<std::string>());
    if (!t) fail(s.path(), "'" + base + "' is not a valid timestamp");
    return t;
  }
  return s.optional_quantity(base, Dim::time);
}

// CSV of rain intervals with columns t_start,t_end (epoch seconds or ISO-8601).
inline std::vector<WetWindow> read_wet_windows(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open wet-window file '" + path.string() + "'");
  auto rec = csv::read(in);
  if (rec.empty()) throw Error(Errc::parse, path.string() + ": no header row");
  auto col = [&](const std::string& name) {
    auto& h = rec.front().fields;
    auto it = std::find(h.begin(), h.end(), name);
    if (it == h.end()) throw Error(Errc::parse, path.string() + ": no column '" + name + "'");
    return static_cast<std::size_t>(it - h.begin());
  };
  auto a = col("t_start"), b = col("t_end");
  std::vector<WetWindow> out;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    const auto& f = rec[i].fields;
    auto s = a < f.size() ? parse_timestamp(f[a]) : std::nullopt;
    auto e = b < f.size() ? parse_timestamp(f[b]) : std::nullopt;
    if (!s || !e) throw Error(Errc::parse, path.string() + ": bad wet window at line " + std::to_string(rec[i].line));
    out.push_back({*s, *e});
  }
  return out;
}

inline SchedulePolicy load_schedule(Section s, const fs::path& base_dir) {
  auto mode = s.text("mode");
  SchedulePolicy out;
  if (mode == "fixed_interval") {
    out = FixedInterval{s.quantity("interval", Dim::time)};
  } else if (mode == "energy_triggered") {
    out = EnergyTriggered{};
  } else if (mode == "adaptive") {
    Adaptive a;
    a.dry_interval = s.quantity("dry_interval", Dim::time);
    a.wet_interval = s.quantity("wet_interval", Dim::time);
    if (auto csv_path = s.optional_text("wet_windows_csv")) {
      fs::path p(*csv_path);
      a.wet_windows = read_wet_windows(p.is_absolute() ? p : base_dir / p);
    }
    if (s.has("wet_windows")) {
      const auto& arr = s.raw("wet_windows");
      if (!arr.is_array()) fail(s.path(), "'wet_windows' must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section w(arr[i], s.path() + ".wet_windows[" + std::to_string(i) + "]");
        auto start = read_instant(w, "start");
        auto end = read_instant(w, "end");
        if (!start || !end) fail(w.path(), "wet window needs start and end");
        a.wet_windows.push_back({*start, *end});
        w.finish();
      }
    }
    std::sort(a.wet_windows.begin(), a.wet_windows.end(),
              [](const WetWindow& x, const WetWindow& y) { return x.t_start < y.t_start; });
    out = a;
  } else {
    fail(s.path(), "schedule mode must be fixed_interval, energy_triggered or adaptive");
  }
  s.finish();
  validate(out);
  return out;
}

inline NodeSpec load_node(Section s, const fs::path& base_dir) {
  NodeSpec n;
  n.label = s.optional_text("label").value_or("node");
  n.sleep_power = s.quantity("sleep_power", Dim::power);
  const auto& tasks = s.raw("tasks");
  if (!tasks.is_array()) fail(s.path(), "'tasks' must be an array");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Section t(tasks[i], s.path() + ".tasks[" + std::to_string(i) + "]");
    n.active_breakdown.push_back({t.text("name"), t.quantity("energy", Dim::energy)});
    t.optional_text("note");
    t.finish();
  }
  if (s.has("radio")) {
    // What-if override of the uplink energy, e.g. {"preset": "radio/nbiot.json"}.
    auto r = s.child("radio");
    auto task = r.optional_text("task").value_or("lora");
    double e = r.quantity("energy", Dim::energy);
    r.optional_text("label");
    r.optional_text("provenance");
    r.finish();
    auto it = std::find_if(n.active_breakdown.begin(), n.active_breakdown.end(),
                           [&](const Task& t) { return t.name == task; });
    if (it == n.active_breakdown.end()) fail(s.path(), "radio override names unknown task '" + task + "'");
    it->energy = e;
  }
  if (s.has("schedule")) n.schedule = load_schedule(s.child("schedule"), base_dir);
  s.optional_text("provenance");
  s.optional_text("note");
  s.finish();
  n.validate();
  return n;
}

enum class EnvKind { delta_t, temperatures, irradiance };

struct EnvironmentSpec {
  EnvKind kind = EnvKind::irradiance;
  std::string time_column = "t";
  std::string value_column = "v";
  std::string water_column = "water";
  std::string wall_column = "wall";
  bool celsius = false;
};

// Reference measurement used to calibrate the harvester before extrapolation.
struct ReferenceSpec {
  Quantity quantity = Quantity::power_W;
  std::string time_column = "t";
  std::string value_column = "v";
};

struct SimulationSpec {
  double step = 60.0;
  std::optional<double> initial_voltage;
  std::optional<double> t_start;
  std::optional<double> t_end;
  bool strict_gaps = false;
};

struct SweepSpec {
  std::vector<Harvester> harvesters;
  std::vector<ConverterSpec> converters;
  std::vector<double> quality_factors;
};

struct ProjectConfig {
  fs::path path;
  std::string label = "system";
  std::optional<Harvester> harvester;
  std::optional<ConverterSpec> converter;
  std::optional<StorageSpec> storage;
  std::optional<NodeSpec> node;
  SimulationSpec simulation;
  EnvironmentSpec environment;
  std::optional<ReferenceSpec> reference;
  std::optional<SweepSpec> sweep;
  std::vector<std::string> preset_files;  // every preset file pulled in
  std::vector<std::string> notes;          // provenance warnings for the user

  const Harvester& need_harvester() const {
    if (!harvester) throw Error(Errc::parse, path.string() + ": missing 'harvester' section");
    return *harvester;
  }
  const ConverterSpec& need_converter() const {
    if (!converter) throw Error(Errc::parse, path.string() + ": missing 'converter' section");
    return *converter;
  }
  const StorageSpec& need_storage() const {
    if (!storage) throw Error(Errc::parse, path.string() + ": missing 'storage' section");
    return *storage;
  }
  const NodeSpec& need_node() const {
    if (!node) throw Error(Errc::parse, path.string() + ": missing 'node' section");
    return *node;
  }
};

inline void note_provenance(const ConverterSpec& c, std::vector<std::string>& notes) {
  if (c.provenance == "placeholder")
    notes.push_back("converter '" + c.label +
                    "' uses a placeholder efficiency curve; replace it with datasheet data before trusting results");
}

inline Quantity parse_reference_quantity(const std::string& s, const std::string& where) {
  if (s == "cell_power") return Quantity::power_W;
  if (s == "teg_voltage") return Quantity::voltage_V;
  if (s == "teg_delta_t") return Quantity::temperature_difference_K;
  fail(where, "reference quantity must be cell_power, teg_voltage or teg_delta_t");
}

inline ProjectConfig load_project(const json& doc, const fs::path& path, const Resolver& resolver) {
  ProjectConfig cfg;
  cfg.path = path;
  const fs::path base = path.parent_path();
  const std::string where = path.filename().string();
  if (!doc.is_object()) fail(where, "top level must be an object");
  json expanded = doc;
  for (const char* key : {"harvester", "converter", "storage", "node"})
    if (doc.contains(key)) expanded[key] = expand_preset(doc.at(key), base, resolver, &cfg.preset_files);
  if (expanded.contains("node") && expanded["node"].is_object() && expanded["node"].contains("radio"))
    expanded["node"]["radio"] = expand_preset(expanded["node"]["radio"], base, resolver, &cfg.preset_files);
  if (doc.contains("sweep")) {
    auto& sw = expanded["sweep"];
    for (const char* key : {"harvesters", "converters"})
      if (sw.contains(key) && sw[key].is_array())
        for (auto& item : sw[key]) item = expand_preset(item, base, resolver, &cfg.preset_files);
  }

  Section top(expanded, where);
  cfg.label = top.optional_text("label").value_or(path.stem().string());
  if (top.has("harvester")) cfg.harvester = load_harvester(top.child("harvester"));
  if (top.has("converter")) {
    cfg.converter = load_converter(top.child("converter"));
    note_provenance(*cfg.converter, cfg.notes);
  }
  if (top.has("storage")) cfg.storage = load_storage(top.child("storage"));
  if (top.has("node")) cfg.node = load_node(top.child("node"), base);
  if (top.has("simulation")) {
    auto s = top.child("simulation");
    cfg.simulation.step = s.quantity_or("step", Dim::time, 60.0);
    cfg.simulation.initial_voltage = s.optional_quantity("initial_voltage", Dim::voltage);
    cfg.simulation.t_start = read_instant(s, "t_start");
    cfg.simulation.t_end = read_instant(s, "t_end");
    cfg.simulation.strict_gaps = s.optional_flag("strict_gaps").value_or(false);
    s.finish();
  }
  if (top.has("environment")) {
    auto s = top.child("environment");
    auto kind = s.text("kind");
    if (kind == "delta_t") cfg.environment.kind = EnvKind::delta_t;
    else if (kind == "temperatures") cfg.environment.kind = EnvKind::temperatures;
    else if (kind == "irradiance") cfg.environment.kind = EnvKind::irradiance;
    else fail(s.path(), "kind must be delta_t, temperatures or irradiance");
    cfg.environment.time_column = s.optional_text("time_column").value_or("t");
    cfg.environment.value_column = s.optional_text("value_column").value_or("v");
    cfg.environment.water_column = s.optional_text("water_column").value_or("water");
    cfg.environment.wall_column = s.optional_text("wall_column").value_or("wall");
    cfg.environment.celsius = s.optional_flag("celsius").value_or(false);
    s.finish();
  } else if (cfg.harvester && std::holds_alternative<TegSpec>(*cfg.harvester)) {
    cfg.environment.kind = EnvKind::delta_t;
  }
  if (top.has("reference")) {
    auto s = top.child("reference");
    ReferenceSpec r;
    r.quantity = parse_reference_quantity(s.text("quantity"), s.path());
    r.time_column = s.optional_text("time_column").value_or("t");
    r.value_column = s.optional_text("value_column").value_or("v");
    s.finish();
    cfg.reference = r;
  }
  if (top.has("sweep")) {
    auto s = top.child("sweep");
    SweepSpec sw;
    for (const char* key : {"harvesters", "converters"}) {
      const auto& arr = s.raw(key);
      if (!arr.is_array() || arr.empty()) fail(s.path(), std::string("'") + key + "' must be a non-empty array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section item(arr[i], s.path() + "." + key + "[" + std::to_string(i) + "]");
        if (std::string_view(key) == "harvesters") {
          sw.harvesters.push_back(load_harvester(item));
        } else {
          sw.converters.push_back(load_converter(item));
          note_provenance(sw.converters.back(), cfg.notes);
        }
      }
    }
    if (s.has_quantity("quality_factors", Dim::ratio)) sw.quality_factors = s.quantity_array("quality_factors", Dim::ratio);
    s.finish();
    cfg.sweep = std::move(sw);
  }
  top.optional_text("note");
  top.finish();
  return cfg;
}

inline ProjectConfig load_project(const fs::path& path, const Resolver& resolver = {}) {
  return load_project(read_json_file(path), path, resolver);
}

// Standalone preset file of one kind.
inline ConverterSpec load_converter_file(const fs::path& path, const Resolver& resolver = {}) {
  json j = expand_preset(read_json_file(path), path.parent_path(), resolver);
  return load_converter(Section(j, path.filename().string()));
}
inline StorageSpec load_storage_file(const fs::path& path, const Resolver& resolver = {}) {
  json j = expand_preset(read_json_file(path), path.parent_path(), resolver);
  return load_storage(Section(j, path.filename().string()));
}
inline NodeSpec load_node_file(const fs::path& path, const Resolver& resolver = {}) {
  json j = expand_preset(read_json_file(path), path.parent_path(), resolver);
  return load_node(Section(j, path.filename().string()), path.parent_path());
}
inline Harvester load_harvester_file(const fs::path& path, const Resolver& resolver = {}) {
  json j = expand_preset(read_json_file(path), path.parent_path(), resolver);
  return load_harvester(Section(j, path.filename().string()));
}

}  // namespace harvestsim::config
