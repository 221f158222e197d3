// harvestsim command-line driver.
//
// Exit codes: 0 ok, 1 usage / io / config, 2 data or domain error,
// 3 outputs written but the energy ledger does not balance.

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "harvestsim/config.hpp"
#include "harvestsim/engine.hpp"
#include "harvestsim/planner.hpp"
#include "harvestsim/report.hpp"

namespace fs = std::filesystem;
using namespace harvestsim;
using report::ordered_json;

namespace {

struct Globals {
  std::string config;
  std::string out_dir = ".";
  std::optional<double> step;
  bool strict_gaps = false;
  std::uint64_t seed = 1;
};

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::io:
    case Errc::parse: return 1;
    default: return 2;
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw Error(Errc::io, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Run manifest. The digest covers everything except the wall-clock timestamps,
// so identical inputs give identical digests and identical output files.
class Manifest {
 public:
  Manifest(std::string command, const Globals& g) : started_(utc_now()) {
    body_["command"] = std::move(command);
    body_["tool_version"] = HARVESTSIM_VERSION;
    body_["config_path"] = g.config.empty() ? ordered_json(nullptr) : ordered_json(g.config);
    body_["arguments"] = ordered_json::object();
    body_["input_hashes"] = ordered_json::array();
    body_["outputs"] = ordered_json::array();
    if (g.step) argument("step_s", *g.step);
    if (g.strict_gaps) argument("strict_gaps", true);
  }

  template <class T>
  void argument(const std::string& key, const T& v) {
    body_["arguments"][key] = v;
  }

  void input(const std::string& path) {
    for (const auto& e : body_["input_hashes"])
      if (e["path"] == path) return;
    body_["input_hashes"].push_back({{"path", path}, {"sha256", sha256_hex(slurp(path))}});
  }

  void output(const std::string& name) { body_["outputs"].push_back(name); }

  std::string digest() const { return sha256_hex(body_.dump()); }

  void write(const fs::path& dir) const {
    ordered_json j = body_;
    j["digest"] = digest();
    j["started"] = started_;
    j["finished"] = utc_now();
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) throw Error(Errc::io, "cannot write " + (dir / "manifest.json").string());
  }

 private:
  ordered_json body_;
  std::string started_;
};

fs::path prepare_out_dir(const Globals& g) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create output directory '" + g.out_dir + "': " + ec.message());
  return dir;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  fn(out);
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) {
  write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

config::ProjectConfig load_config(const Globals& g, Manifest& m) {
  if (g.config.empty()) throw Error(Errc::io, "--config is required for this command");
  config::Resolver resolver;
  if (const char* extra = std::getenv("HARVESTSIM_PRESET_DIR")) resolver.preset_dirs.emplace_back(extra);
  resolver.preset_dirs.emplace_back(HARVESTSIM_PRESET_DIR);
  auto cfg = config::load_project(g.config, resolver);
  m.input(g.config);
  for (const auto& p : cfg.preset_files) m.input(p);
  for (const auto& n : cfg.notes) warn(n);
  return cfg;
}

EnvTrace read_trace(const std::string& path, Quantity q, ParseOptions opt, Manifest& m) {
  auto parsed = parse_trace(path, q, opt);
  for (const auto& w : parsed.warnings) warn(w);
  m.input(path);
  return std::move(parsed.trace);
}

ParseOptions env_options(const config::ProjectConfig& cfg, const Globals& g, const std::string& value_column,
                         bool absolute_temperature) {
  ParseOptions o;
  o.time_column = cfg.environment.time_column;
  o.value_column = value_column;
  o.celsius = absolute_temperature && cfg.environment.celsius;
  o.strict_gaps = g.strict_gaps || cfg.simulation.strict_gaps;
  return o;
}

Environment read_environment(const config::ProjectConfig& cfg, const Globals& g, const std::string& path,
                             Manifest& m) {
  const auto& e = cfg.environment;
  switch (e.kind) {
    case config::EnvKind::irradiance:
      return IrradianceEnv{read_trace(path, Quantity::irradiance_W_per_m2, env_options(cfg, g, e.value_column, false), m)};
    case config::EnvKind::delta_t:
      return DeltaTEnv{
          read_trace(path, Quantity::temperature_difference_K, env_options(cfg, g, e.value_column, false), m)};
    case config::EnvKind::temperatures:
      return TemperaturePairEnv{read_trace(path, Quantity::temperature_K, env_options(cfg, g, e.water_column, true), m),
                                read_trace(path, Quantity::temperature_K, env_options(cfg, g, e.wall_column, true), m)};
  }
  throw Error(Errc::parse, "unknown environment kind");
}

// Single trace for the planner: irradiance or temperature difference.
EnvTrace planner_trace(const config::ProjectConfig& cfg, const Globals& g, const std::string& path, Manifest& m) {
  auto env = read_environment(cfg, g, path, m);
  if (auto* p = std::get_if<TemperaturePairEnv>(&env))
    return difference_trace(p->water, p->wall, g.step.value_or(cfg.simulation.step));
  if (auto* d = std::get_if<DeltaTEnv>(&env)) return d->delta_t;
  return std::get<IrradianceEnv>(env).irradiance;
}

std::optional<EnvTrace> reference_trace(const config::ProjectConfig& cfg, const Globals& g, const std::string& path,
                                        Manifest& m) {
  if (path.empty()) return std::nullopt;
  config::ReferenceSpec ref;
  if (cfg.reference) ref = *cfg.reference;
  else if (std::holds_alternative<TegSpec>(cfg.need_harvester())) ref.quantity = Quantity::voltage_V;
  ParseOptions o;
  o.time_column = ref.time_column;
  o.value_column = ref.value_column;
  o.strict_gaps = g.strict_gaps || cfg.simulation.strict_gaps;
  return read_trace(path, ref.quantity, o, m);
}

// ---- calibrate -------------------------------------------------------------

int cmd_calibrate(const Globals& g, const std::string& reference_path, const std::string& env_path) {
  Manifest m("calibrate", g);
  auto cfg = load_config(g, m);
  const auto& h = cfg.need_harvester();
  auto env = planner_trace(cfg, g, env_path, m);
  auto ref = reference_trace(cfg, g, reference_path, m);
  const double step = g.step.value_or(60.0);

  ordered_json j;
  j["manifest"] = m.digest();
  j["harvester"] = label_of(h);
  if (std::holds_alternative<PvSpec>(h)) {
    if (ref->quantity() != Quantity::power_W) throw Error(Errc::mismatch, "photovoltaic reference must be cell power");
    auto cal = calibrate_pv(align(*ref, env, step));
    j["k"] = cal.k;
    j["residual_rms"] = cal.residual_rms;
    j["overlap_hours"] = cal.overlap_s / 3600.0;
    j["samples"] = cal.samples;
  } else {
    std::vector<std::string> warnings;
    auto pair = align(*ref, env, step);
    double q = detail::fit_quality_factor(std::get<TegSpec>(h), *ref, env, step, warnings);
    for (const auto& w : warnings) warn(w);
    j["quality_factor"] = q;
    j["overlap_hours"] = (pair.t_end - pair.t_start) / 3600.0;
    j["samples"] = pair.a.size();
    j["warnings"] = warnings;
  }
  auto dir = prepare_out_dir(g);
  m.output("calibration.json");
  j["manifest"] = m.digest();
  write_json(dir / "calibration.json", j);
  m.write(dir);
  return 0;
}

// ---- simulate --------------------------------------------------------------

int cmd_simulate(const Globals& g, const std::string& env_path) {
  Manifest m("simulate", g);
  auto cfg = load_config(g, m);
  SystemConfig sys;
  sys.label = cfg.label;
  sys.harvester = cfg.need_harvester();
  sys.converter = cfg.need_converter();
  sys.storage = cfg.need_storage();
  sys.node = cfg.need_node();
  sys.env = read_environment(cfg, g, env_path, m);
  sys.step = g.step.value_or(cfg.simulation.step);
  sys.initial_voltage = cfg.simulation.initial_voltage;
  sys.t_start = cfg.simulation.t_start;
  sys.t_end = cfg.simulation.t_end;

  auto res = run(sys);
  for (const auto& w : res.warnings) warn(w);
  auto check = ledger_check(res);

  auto dir = prepare_out_dir(g);
  for (const char* f : {"soc.csv", "events.csv", "ledger.json"}) m.output(f);
  const auto digest = m.digest();
  write_file(dir / "soc.csv", [&](std::ostream& o) { report::write_soc_csv(o, res, digest); });
  write_file(dir / "events.csv", [&](std::ostream& o) { report::write_events_csv(o, res, digest); });
  ordered_json j;
  j["manifest"] = digest;
  j.update(report::ledger_json(res));
  write_json(dir / "ledger.json", j);
  m.write(dir);

  std::cout << res.label << ": " << res.stats.cycles << " cycles, final " << csv::format_number(res.final_state.voltage)
            << " V\n";
  if (!check.ok) {
    std::cerr << "error: energy ledger does not balance (relative residual " << csv::format_number(check.residual)
              << ")\n";
    return 3;
  }
  return 0;
}

// ---- feasibility -----------------------------------------------------------

int cmd_feasibility(const Globals& g, const std::string& env_path, const std::string& reference_path) {
  Manifest m("feasibility", g);
  auto cfg = load_config(g, m);
  const auto& node = cfg.need_node();
  auto env = planner_trace(cfg, g, env_path, m);
  auto ref = reference_trace(cfg, g, reference_path, m);
  ExtrapolationOptions opt;
  if (g.step) opt.align_step = *g.step;
  auto x = extrapolate_annual(ref, env, cfg.need_harvester(), cfg.need_converter(), opt);
  for (const auto& w : x.warnings) warn(w);
  auto est = energy_balance(x.energy_year, node, cfg.label);

  auto dir = prepare_out_dir(g);
  m.output("feasibility.json");
  ordered_json j;
  j["manifest"] = m.digest();
  j["harvester"] = label_of(x.harvester);
  j["converter"] = cfg.need_converter().label;
  j["node"] = node.label;
  j["extrapolation"] = report::extrapolation_json(x);
  j["estimate"] = report::estimate_json(est);
  j["notes"] = cfg.notes;
  write_json(dir / "feasibility.json", j);
  m.write(dir);

  std::cout << cfg.label << ": E_harvest " << csv::format_number(est.energy_harvest_year) << " J/yr, "
            << est.n_cycles << " cycles/yr, " << (est.feasible ? "feasible" : "NOT feasible") << '\n';
  return 0;
}

// ---- sweep -----------------------------------------------------------------

int cmd_sweep(const Globals& g, const std::string& delta_t_path, const std::string& irradiance_path) {
  Manifest m("sweep", g);
  auto cfg = load_config(g, m);
  if (!cfg.sweep) throw Error(Errc::parse, g.config + ": missing 'sweep' section");
  SweepEnvironment env;
  ParseOptions o;
  o.time_column = cfg.environment.time_column;
  o.value_column = cfg.environment.value_column;
  o.strict_gaps = g.strict_gaps || cfg.simulation.strict_gaps;
  if (!delta_t_path.empty()) env.delta_t = read_trace(delta_t_path, Quantity::temperature_difference_K, o, m);
  if (!irradiance_path.empty()) env.irradiance = read_trace(irradiance_path, Quantity::irradiance_W_per_m2, o, m);
  if (!env.delta_t && !env.irradiance) throw Error(Errc::io, "sweep needs --delta-t and/or --irradiance");

  auto res = sweep(cfg.sweep->harvesters, cfg.sweep->converters, cfg.sweep->quality_factors, env, cfg.need_node());
  for (const auto& s : res.skipped) warn("skipped " + s);

  auto dir = prepare_out_dir(g);
  m.output("sweep.csv");
  m.output("sweep.json");
  const auto digest = m.digest();
  write_file(dir / "sweep.csv", [&](std::ostream& out) { report::write_sweep_csv(out, res, digest); });
  ordered_json j;
  j["manifest"] = digest;
  j.update(report::sweep_json(res));
  write_json(dir / "sweep.json", j);
  m.write(dir);
  std::cout << res.rows.size() << " rows, " << res.skipped.size() << " skipped\n";
  return 0;
}

// ---- synth -----------------------------------------------------------------

// Seeded synthetic traces for trying the tool without field data.
int cmd_synth(const Globals& g, const std::string& kind, double days, double k) {
  if (!(days > 0)) throw Error(Errc::invalid, "--days must be > 0");
  Manifest m("synth", g);
  m.argument("kind", kind);
  m.argument("days", days);
  m.argument("seed", g.seed);
  if (kind == "pv-pair") m.argument("k", k);
  std::mt19937_64 rng(g.seed);
  const double t0 = 1672531200.0, step = 600.0, day = 86400.0;
  const auto n = static_cast<std::size_t>(std::llround(days * day / step));
  auto dir = prepare_out_dir(g);

  auto emit = [&](const std::string& name, const std::string& column, const std::vector<double>& v) {
    m.output(name);
    write_file(dir / name, [&](std::ostream& out) {
      csv::write_row(out, {"t", column});
      for (std::size_t i = 0; i < v.size(); ++i)
        csv::write_row(out, {csv::format_number(t0 + step * static_cast<double>(i)), csv::format_number(v[i])});
    });
  };

  if (kind == "solar" || kind == "pv-pair") {
    std::uniform_real_distribution<double> cloud(0.2, 1.0);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<double> irr(n + 1), power(n + 1);
    double c = 1.0;
    for (std::size_t i = 0; i <= n; ++i) {
      double t = step * static_cast<double>(i);
      if (i % 6 == 0) c = cloud(rng);  // new cloud factor every hour
      double phase = std::fmod(t, day) / day;
      double season = 0.7 + 0.3 * std::cos(2 * std::numbers::pi * (t / (365 * day) - 0.47));
      irr[i] = phase < 0.5 ? 400.0 * season * c * std::sin(2 * std::numbers::pi * phase) : 0.0;
      power[i] = std::max(0.0, k * irr[i] * (1.0 + noise(rng)));
    }
    emit("irradiance.csv", "irradiance_W_m2", irr);
    if (kind == "pv-pair") emit("cell_power.csv", "power_W", power);
  } else if (kind == "teg") {
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<double> dT(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      double t = step * static_cast<double>(i);
      double seasonal = 0.55 + 0.3 * std::cos(2 * std::numbers::pi * t / (365 * day));
      double daily = 0.15 * std::sin(2 * std::numbers::pi * t / day);
      dT[i] = std::max(0.0, 8.0 * (seasonal + daily) + noise(rng));
    }
    emit("delta_t.csv", "delta_t_K", dT);
  } else {
    throw Error(Errc::invalid, "unknown synth kind '" + kind + "' (solar, pv-pair, teg)");
  }
  m.write(dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harvestsim: energy-harvesting sensor node simulator and planner"};
  app.set_version_flag("--version", HARVESTSIM_VERSION);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "System/project config file (JSON with comments)");
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--step", g.step, "Time step in seconds (simulation step / alignment grid)");
  app.add_flag("--strict-gaps", g.strict_gaps, "Reject trace gaps instead of bridging them");
  app.add_option("--seed", g.seed, "Random seed (synth only)")->capture_default_str();

  std::string reference, env, delta_t, irradiance, kind = "solar";
  double days = 365, k = 1e-6;

  auto* cal = app.add_subcommand("calibrate", "Fit the harvester coefficient to a reference measurement");
  cal->add_option("--reference", reference, "Measured cell power (PV) or TEG voltage / delta-T (TEG) CSV")->required();
  cal->add_option("--env", env, "Environment trace CSV (irradiance or temperatures)")->required();

  auto* sim = app.add_subcommand("simulate", "Time-step simulation of one system");
  sim->add_option("--env", env, "Environment trace CSV")->required();

  auto* feas = app.add_subcommand("feasibility", "Annual energy balance for one system");
  feas->add_option("--env", env, "Annual environment trace CSV")->required();
  feas->add_option("--reference", reference, "Optional reference measurement for calibration");

  auto* sw = app.add_subcommand("sweep", "Design-space sweep over harvesters, converters and q");
  sw->add_option("--delta-t", delta_t, "Annual temperature-difference trace CSV");
  sw->add_option("--irradiance", irradiance, "Annual irradiance trace CSV");

  auto* syn = app.add_subcommand("synth", "Write seeded synthetic traces");
  syn->add_option("--kind", kind, "solar, pv-pair or teg")->capture_default_str();
  syn->add_option("--days", days, "Length in days")->capture_default_str();
  syn->add_option("--k", k, "Cell coefficient for pv-pair, W per W/m^2")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (g.step && !(*g.step > 0)) {
    std::cerr << "error: --step must be > 0\n";
    return 1;
  }

  try {
    if (*cal) return cmd_calibrate(g, reference, env);
    if (*sim) return cmd_simulate(g, env);
    if (*feas) return cmd_feasibility(g, env, reference);
    if (*sw) return cmd_sweep(g, delta_t, irradiance);
    if (*syn) return cmd_synth(g, kind, days, k);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
