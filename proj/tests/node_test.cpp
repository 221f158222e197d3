#include <gtest/gtest.h>

#include <random>

#include "harvestsim/node.hpp"
#include "harvestsim/units.hpp"

using namespace harvestsim;

namespace {

NodeSpec reference_node(double sleep_w) {
  return {"node", sleep_w, {{"wake_mcu_fram", 0.221}, {"sensor", 0.010}, {"lora", 0.040}}, EnergyTriggered{}};
}

std::size_t count_fires(const SchedulePolicy& p, double horizon) {
  std::size_t n = 0;
  double t = 0;
  while (true) {
    auto next = next_fire(p, t, 0, 1);
    if (!next || *next > horizon) break;
    t = *next;
    ++n;
  }
  return n;
}

}  // namespace

TEST(ActiveCycleEnergy, DefaultBreakdown) {
  EXPECT_NEAR(active_cycle_energy(reference_node(4.5e-6)), 0.271, 1e-15);
  NodeSpec single{"n", 0, {{"all", 1.0}}};
  EXPECT_EQ(active_cycle_energy(single), 1.0);
  NodeSpec empty{"n", 0, {}};
  EXPECT_THROW(active_cycle_energy(empty), Error);
  EXPECT_THROW(empty.validate(), Error);
}

TEST(SleepEnergy, AnnualStandby) {
  EXPECT_NEAR(sleep_energy(reference_node(4.5e-6), kYearSeconds), 141.912, 1e-9);
  EXPECT_NEAR(sleep_energy(reference_node(7e-6), kYearSeconds), 220.752, 1e-9);
  EXPECT_EQ(sleep_energy(reference_node(7e-6), 0), 0.0);
  EXPECT_THROW(sleep_energy(reference_node(7e-6), -1), Error);
}

TEST(NextFire, FixedGrid) {
  EXPECT_EQ(next_fire(FixedInterval{300}, 450, 0, 0), 600.0);
  EXPECT_EQ(next_fire(FixedInterval{300}, 600, 0, 0), 900.0);
  EXPECT_EQ(next_fire(FixedInterval{300}, 0, 0, 0), 300.0);
}

TEST(NextFire, EnergyTriggered) {
  EXPECT_EQ(next_fire(EnergyTriggered{}, 1234, 0.30, 0.271), 1234.0);
  EXPECT_FALSE(next_fire(EnergyTriggered{}, 1234, 0.27, 0.271));
  EXPECT_EQ(next_fire(EnergyTriggered{}, 0, 0.271, 0.271), 0.0);
}

TEST(NextFire, AdaptiveWetAndDry) {
  Adaptive a{1800, 30, {{3600, 7200}}};
  EXPECT_EQ(next_fire(a, 3600, 0, 0), 3630.0);
  EXPECT_EQ(next_fire(a, 0, 0, 0), 1800.0);
  // Dry cadence would jump past the window start: fire when the window opens.
  EXPECT_EQ(next_fire(a, 3000, 0, 0), 3600.0);
  // Last wet sample, then back to the dry grid.
  EXPECT_EQ(next_fire(a, 7170, 0, 0), 7200.0);
  EXPECT_EQ(next_fire(a, 7200, 0, 0), 9000.0);
}

TEST(NextFire, FixedCountOverHorizon) {
  for (double interval : {30.0, 300.0, 1800.0, 7.5}) {
    for (double horizon : {86400.0, 100000.0, 1234.5}) {
      auto n = count_fires(FixedInterval{interval}, horizon);
      auto expected = static_cast<long>(std::floor(horizon / interval));
      EXPECT_LE(std::abs(static_cast<long>(n) - expected), 1);
    }
  }
}

TEST(NextFire, EnergyTriggeredNeverBelowCycleEnergy) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    double usable = u(rng), active = u(rng);
    if (next_fire(EnergyTriggered{}, 0, usable, active)) {
      EXPECT_GE(usable, active);
    }
  }
}

TEST(NextFire, AdaptiveWithEqualIntervalsIsFixed) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> t(0, 1e6);
  Adaptive a{600, 600, {{1000, 5000}, {20000, 20001}, {300000, 400000}}};
  for (int i = 0; i < 1000; ++i) {
    double now = t(rng);
    EXPECT_EQ(next_fire(a, now, 0, 0), next_fire(FixedInterval{600}, now, 0, 0)) << now;
  }
}

TEST(SchedulePolicy, Validation) {
  EXPECT_THROW(validate(SchedulePolicy{FixedInterval{0}}), Error);
  EXPECT_THROW(validate(SchedulePolicy{Adaptive{0, 10, {}}}), Error);
  EXPECT_THROW(validate(SchedulePolicy{Adaptive{60, 10, {{10, 20}, {15, 30}}}}), Error);
  EXPECT_THROW(validate(SchedulePolicy{Adaptive{60, 10, {{10, 5}}}}), Error);
  EXPECT_NO_THROW(validate(SchedulePolicy{Adaptive{60, 10, {{10, 20}, {20, 30}}}}));
}
