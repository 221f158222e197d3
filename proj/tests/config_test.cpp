#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "harvestsim/config.hpp"

using namespace harvestsim;
namespace fs = std::filesystem;

namespace {

class ConfigFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("harvestsim_config_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    auto p = dir_ / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p;
  }

  config::Resolver resolver() const { return {{HARVESTSIM_PRESET_DIR}}; }

  fs::path dir_;
};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::io;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Presets, AllShippedPresetsLoad) {
  for (const char* f : {"em8900", "ltc3108", "bq25570", "spv1050"})
    EXPECT_NO_THROW(config::load_converter_file(fixtures::preset(std::string("converters/") + f + ".json"))) << f;
  for (const char* f : {"teg2_40_40", "sm531", "sm400", "sm400k10l", "seeed_313070004"})
    EXPECT_NO_THROW(config::load_harvester_file(fixtures::preset(std::string("harvesters/") + f + ".json"))) << f;
  for (const char* f : {"teg_node", "teg_node_lowpower", "solar_node"})
    EXPECT_NO_THROW(config::load_node_file(fixtures::preset(std::string("nodes/") + f + ".json"))) << f;
  for (const char* f : {"lic_10f", "lic_10f_teg"})
    EXPECT_NO_THROW(config::load_storage_file(fixtures::preset(std::string("storage/") + f + ".json"))) << f;
}

TEST(Presets, ValuesConvertedToSi) {
  auto em = config::load_converter_file(fixtures::preset("converters/em8900.json"));
  EXPECT_DOUBLE_EQ(em.v_start, 0.005);
  EXPECT_EQ(std::get<ImpedanceInput>(em.input).ohms, 2.0);
  EXPECT_EQ(em.provenance, "published");

  auto teg = std::get<TegSpec>(config::load_harvester_file(fixtures::preset("harvesters/teg2_40_40.json")));
  EXPECT_DOUBLE_EQ(teg.seebeck, 0.053);
  EXPECT_DOUBLE_EQ(teg.quality_factor, 0.073);

  auto lic = config::load_storage_file(fixtures::preset("storage/lic_10f.json"));
  EXPECT_DOUBLE_EQ(lic.protection_current, 204.5e-9);
  EXPECT_DOUBLE_EQ(lic.switch_leakage_current, 12e-9);
  auto lic_teg = config::load_storage_file(fixtures::preset("storage/lic_10f_teg.json"));
  EXPECT_DOUBLE_EQ(lic_teg.v_reconnect, 2.3);
  EXPECT_DOUBLE_EQ(lic_teg.v_disconnect, 2.25);

  auto n = config::load_node_file(fixtures::preset("nodes/solar_node.json"));
  EXPECT_DOUBLE_EQ(n.sleep_power, 7e-6);
  EXPECT_NEAR(active_cycle_energy(n), 0.271, 1e-12);

  auto sm400 = std::get<PvSpec>(config::load_harvester_file(fixtures::preset("harvesters/sm400.json")));
  EXPECT_EQ(sm400.area_mm2, 495.0);
}

TEST(Presets, StubConverterRefusesToLoad) {
  auto msg = message_of([] { config::load_converter_file(fixtures::preset("converters/mercury.json")); });
  EXPECT_NE(msg.find("v_start"), std::string::npos) << msg;
}

TEST(Presets, PlaceholderCurvesAreNoted) {
  std::vector<std::string> notes;
  config::note_provenance(config::load_converter_file(fixtures::preset("converters/ltc3108.json")), notes);
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_NE(notes[0].find("placeholder"), std::string::npos);
  notes.clear();
  config::note_provenance(config::load_converter_file(fixtures::preset("converters/em8900.json")), notes);
  EXPECT_TRUE(notes.empty());
}

TEST_F(ConfigFiles, UnitSuffixesAndPercent) {
  auto p = write("s.json", R"({"label": "x", "capacitance_mF": 500, "v_max_V": 5, "v_destroy_mV": 2000,
    "v_disconnect_V": 2.1, "v_reconnect_V": 2.4, "protection_current_uA": 0.2})");
  auto s = config::load_storage_file(p);
  EXPECT_DOUBLE_EQ(s.capacitance, 0.5);
  EXPECT_DOUBLE_EQ(s.v_destroy, 2.0);
  EXPECT_DOUBLE_EQ(s.protection_current, 0.2e-6);

  auto h = write("h.json", R"({"type": "teg", "seebeck_uV_per_K": 53000, "r_internal_mohm": 1500,
    "quality_factor_pct": 7.3})");
  auto teg = std::get<TegSpec>(config::load_harvester_file(h));
  EXPECT_DOUBLE_EQ(teg.seebeck, 0.053);
  EXPECT_DOUBLE_EQ(teg.r_internal, 1.5);
  EXPECT_DOUBLE_EQ(teg.quality_factor, 0.073);
}

TEST_F(ConfigFiles, BareNumbersRejected) {
  auto p = write("s.json", R"({"capacitance": 10, "v_max_V": 5, "v_destroy_V": 2,
    "v_disconnect_V": 2.1, "v_reconnect_V": 2.4})");
  auto msg = message_of([&] { config::load_storage_file(p); });
  EXPECT_NE(msg.find("capacitance"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unit"), std::string::npos) << msg;
}

TEST_F(ConfigFiles, UnknownKeysAndUnitsRejected) {
  auto typo = write("a.json", R"({"capacitance_F": 10, "v_max_V": 5, "v_destroy_V": 2,
    "v_disconect_V": 2.1, "v_disconnect_V": 2.1, "v_reconnect_V": 2.4})");
  EXPECT_EQ(code_of([&] { config::load_storage_file(typo); }), Errc::parse);
  auto bad_unit = write("b.json", R"({"capacitance_kF": 10, "v_max_V": 5, "v_destroy_V": 2,
    "v_disconnect_V": 2.1, "v_reconnect_V": 2.4})");
  EXPECT_EQ(code_of([&] { config::load_storage_file(bad_unit); }), Errc::parse);
  auto twice = write("c.json", R"({"capacitance_F": 10, "capacitance_mF": 10, "v_max_V": 5, "v_destroy_V": 2,
    "v_disconnect_V": 2.1, "v_reconnect_V": 2.4})");
  EXPECT_EQ(code_of([&] { config::load_storage_file(twice); }), Errc::parse);
}

TEST_F(ConfigFiles, CommentsAllowedSyntaxErrorsReported) {
  auto ok = write("ok.json", "// header\n{ /* inline */ \"type\": \"pv\", \"area_cm2\": 4.95 }\n");
  EXPECT_DOUBLE_EQ(std::get<PvSpec>(config::load_harvester_file(ok)).area_mm2, 495.0);
  auto broken = write("broken.json", "{ \"type\": \"pv\", ");
  EXPECT_EQ(code_of([&] { config::load_harvester_file(broken); }), Errc::parse);
  EXPECT_EQ(code_of([&] { config::load_harvester_file(dir_ / "missing.json"); }), Errc::io);
}

TEST_F(ConfigFiles, PresetOverrideAndRadioWhatIf) {
  auto p = write("system.json", R"({
    "label": "teg what-if",
    "harvester": {"preset": "harvesters/teg2_40_40.json", "quality_factor_frac": 0.1},
    "converter": {"preset": "converters/em8900.json"},
    "storage": {"preset": "storage/lic_10f_teg.json"},
    "node": {"preset": "nodes/teg_node_lowpower.json", "radio": {"preset": "radio/nbiot.json"}},
    "simulation": {"step_min": 10, "initial_voltage_V": 2.3, "t_start": "2023-01-01T00:00:00Z"}
  })");
  auto cfg = config::load_project(p, resolver());
  EXPECT_EQ(cfg.label, "teg what-if");
  EXPECT_DOUBLE_EQ(std::get<TegSpec>(cfg.need_harvester()).quality_factor, 0.1);
  EXPECT_DOUBLE_EQ(cfg.need_storage().v_reconnect, 2.3);
  EXPECT_NEAR(active_cycle_energy(cfg.need_node()), 0.231 + 0.064, 1e-12);
  EXPECT_EQ(cfg.simulation.step, 600.0);
  EXPECT_EQ(*cfg.simulation.t_start, fixtures::kEpoch2023);
  EXPECT_EQ(cfg.environment.kind, config::EnvKind::delta_t);
  EXPECT_GE(cfg.preset_files.size(), 5u);
}

TEST_F(ConfigFiles, LocalPresetWinsOverShippedOne) {
  write("converters/em8900.json", R"({"label": "local", "v_start_mV": 20, "v_in_max_V": 1, "mode": "impedance",
    "input_impedance_ohm": 2, "v_out_max_V": 5, "efficiency": {"flat_eta_frac": 0.4}})");
  auto p = write("sys.json", R"({"converter": {"preset": "converters/em8900.json"}})");
  auto cfg = config::load_project(p, resolver());
  EXPECT_EQ(cfg.need_converter().label, "local");
  EXPECT_THROW(cfg.need_storage(), Error);
}

TEST_F(ConfigFiles, MissingPreset) {
  auto p = write("sys.json", R"({"converter": {"preset": "converters/nope.json"}})");
  EXPECT_EQ(code_of([&] { config::load_project(p, resolver()); }), Errc::io);
}

TEST_F(ConfigFiles, EfficiencyGrid) {
  auto p = write("c.json", R"({"label": "g", "v_start_mV": 20, "v_in_max_V": 1, "mode": "mppt",
    "tracking_factor_pct": 95, "v_out_max_V": 5,
    "efficiency": {"v_in_V": [0.1, 0.5], "p_in_uW": [1, 100], "eta_pct": [[20, 40], [30, 60]]}})");
  auto c = config::load_converter_file(p);
  EXPECT_TRUE(c.is_mppt());
  EXPECT_DOUBLE_EQ(std::get<MpptInput>(c.input).tracking_factor, 0.95);
  EXPECT_DOUBLE_EQ(c.efficiency.p_in[1], 1e-4);
  EXPECT_DOUBLE_EQ(c.efficiency.eta[1][1], 0.6);

  auto ragged = write("r.json", R"({"label": "g", "v_start_mV": 20, "v_in_max_V": 1, "mode": "mppt",
    "v_out_max_V": 5, "efficiency": {"v_in_V": [0.1, 0.5], "p_in_uW": [1, 100], "eta_pct": [[20, 40], [30]]}})");
  EXPECT_THROW(config::load_converter_file(ragged), Error);
}

TEST_F(ConfigFiles, AdaptiveScheduleWithWetWindowCsv) {
  write("rain.csv", "t_start,t_end\n2023-01-02T06:00:00Z,2023-01-02T09:00:00Z\n1672531200,1672534800\n");
  auto p = write("n.json", R"({"sleep_power_uW": 7, "tasks": [{"name": "all", "energy_mJ": 271}],
    "schedule": {"mode": "adaptive", "dry_interval_min": 30, "wet_interval_s": 30, "wet_windows_csv": "rain.csv"}})");
  auto n = config::load_node_file(p);
  const auto& a = std::get<Adaptive>(n.schedule);
  EXPECT_EQ(a.dry_interval, 1800.0);
  ASSERT_EQ(a.wet_windows.size(), 2u);
  EXPECT_EQ(a.wet_windows[0].t_start, fixtures::kEpoch2023);  // sorted
  EXPECT_EQ(a.wet_windows[1].t_end, fixtures::kEpoch2023 + 86400 + 9 * 3600);

  write("bad.csv", "t_start,t_end\nyesterday,today\n");
  auto q = write("m.json", R"({"sleep_power_uW": 7, "tasks": [{"name": "all", "energy_mJ": 271}],
    "schedule": {"mode": "adaptive", "dry_interval_min": 30, "wet_interval_s": 30, "wet_windows_csv": "bad.csv"}})");
  EXPECT_EQ(code_of([&] { config::load_node_file(q); }), Errc::parse);
}

TEST_F(ConfigFiles, SweepSection) {
  auto p = write("sweep.json", R"({
    "node": {"preset": "nodes/teg_node_lowpower.json"},
    "sweep": {
      "harvesters": [{"preset": "harvesters/teg2_40_40.json"}, {"preset": "harvesters/sm400.json"}],
      "converters": [{"preset": "converters/em8900.json"}, {"preset": "converters/bq25570.json"}],
      "quality_factors_frac": [0.05, 0.1]
    }
  })");
  auto cfg = config::load_project(p, resolver());
  ASSERT_TRUE(cfg.sweep);
  EXPECT_EQ(cfg.sweep->harvesters.size(), 2u);
  EXPECT_EQ(cfg.sweep->quality_factors, (std::vector<double>{0.05, 0.1}));
  EXPECT_FALSE(cfg.notes.empty());  // bq25570 curve is a placeholder
}
