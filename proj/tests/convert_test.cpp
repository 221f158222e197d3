#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "harvestsim/convert.hpp"

using namespace harvestsim;

namespace {

ConverterSpec em8900_like() {
  ConverterSpec c;
  c.label = "EM8900";
  c.v_start = 0.005;
  c.v_in_max = 0.5;
  c.input = ImpedanceInput{2.0};
  c.efficiency = EfficiencyTable::flat(0.5);
  c.v_out_max = 5.3;
  return c;
}

EfficiencyTable grid() {
  return {{0.5, 1.0, 2.0}, {1e-6, 1e-5, 1e-4, 1e-3},
          {{0.10, 0.30, 0.50, 0.60}, {0.20, 0.40, 0.70, 0.80}, {0.25, 0.45, 0.75, 0.90}}};
}

// Source that delivers exactly `p` at matched load with the reference TEG resistance.
SourceOutput teg_like(double p, double r = 1.5) {
  double v = std::sqrt(4 * r * p);
  return {v, p, v / 2, r};
}

}  // namespace

TEST(TransferFactor, Matching) {
  EXPECT_EQ(transfer_factor(1.5, 1.5), 1.0);
  EXPECT_NEAR(transfer_factor(1.5, 2.0), 0.9796, 0.0005);
  EXPECT_NEAR(transfer_factor(1.0, 100.0), 400.0 / (101.0 * 101.0), 1e-15);
  EXPECT_NEAR(transfer_factor(1.0, 100.0), 0.0392, 1e-4);
  EXPECT_THROW(transfer_factor(0, 1), Error);
}

TEST(TransferFactor, SweepPeaksAtMatchedLoad) {
  // Brute-force: delivered power V^2 R / (Rs+R)^2 maximised over a fine R grid.
  for (double rs : {0.3, 1.5, 7.0}) {
    double best_r = 0, best_p = -1;
    for (double r = 0.01; r < 30; r += 0.001) {
      double p = r / ((rs + r) * (rs + r));
      if (p > best_p) best_p = p, best_r = r;
    }
    EXPECT_NEAR(best_r, rs, 0.002);
    EXPECT_NEAR(transfer_factor(rs, best_r), 1.0, 1e-6);
  }
}

TEST(TransferFactor, NeverAboveOne) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> r(1e-3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    double a = r(rng), b = r(rng);
    EXPECT_LE(transfer_factor(a, b), 1.0);
    if (a != b) {
      EXPECT_LT(transfer_factor(a, b), 1.0);
    }
  }
}

TEST(ConverterOutput, BoosterChainFromMeasuredPoint) {
  // 40 uW available, 1.5 ohm into 2 ohm, 50 % -> 19.59 uW
  double out = converter_output(em8900_like(), teg_like(40e-6));
  EXPECT_NEAR(out, 40e-6 * (12.0 / 12.25) * 0.5, 1e-15);
  EXPECT_NEAR(out, 19.58e-6, 0.005 * 19.58e-6);
}

TEST(ConverterOutput, BelowStartVoltage) {
  SourceOutput src{0.004, 1e-6, 0.002, 1.5};
  EXPECT_EQ(converter_output(em8900_like(), src), 0.0);
  EXPECT_FALSE(converter_active(em8900_like(), src));
}

TEST(ConverterOutput, LosslessMpptIdentity) {
  ConverterSpec c;
  c.v_start = 0;
  c.v_in_max = 18;
  c.v_out_max = 5.3;
  c.input = MpptInput{1.0};
  c.efficiency = EfficiencyTable::flat(1.0);
  SourceOutput src{1.0, 123e-6, 1.0, std::nullopt};
  EXPECT_EQ(converter_output(c, src), 123e-6);
}

TEST(ConverterOutput, OverVoltageIsAnError) {
  SourceOutput src{0.6, 1e-3, 0.3, 1.5};
  try {
    converter_output(em8900_like(), src);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::over_voltage);
  }
}

TEST(ConverterOutput, ImpedanceModeNeedsResistiveSource) {
  SourceOutput pv{1.0, 1e-4, 1.0, std::nullopt};
  auto c = em8900_like();
  c.v_in_max = 2;
  EXPECT_THROW(converter_output(c, pv), Error);
}

TEST(ConverterOutput, MonotoneAndNoGain) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> p(1e-7, 1e-3);
  ConverterSpec c = em8900_like();
  c.v_in_max = 10;
  c.efficiency = grid();
  ConverterSpec mppt = c;
  mppt.input = MpptInput{0.95};
  for (int i = 0; i < 500; ++i) {
    double a = p(rng), b = p(rng);
    if (a > b) std::swap(a, b);
    for (const auto* spec : {&c, &mppt}) {
      // Hold v_oc fixed above v_start so only the available power changes.
      SourceOutput sa{0.05, a, 0.025, 1.5}, sb{0.05, b, 0.025, 1.5};
      EXPECT_LE(converter_output(*spec, sa), converter_output(*spec, sb) * (1 + 1e-12));
      EXPECT_LE(converter_output(*spec, sa), a);
    }
  }
}

TEST(InterpolateEfficiency, KnotsAndMidpoints) {
  auto t = grid();
  for (std::size_t i = 0; i < t.v_in.size(); ++i)
    for (std::size_t j = 0; j < t.p_in.size(); ++j)
      EXPECT_DOUBLE_EQ(interpolate_efficiency(t, t.v_in[i], t.p_in[j]), t.eta[i][j]);
  // Midway in v at a p knot.
  EXPECT_DOUBLE_EQ(interpolate_efficiency(t, 0.75, 1e-5), 0.35);
  // Midway in log10(p) at a v knot: sqrt(1e-5 * 1e-4).
  EXPECT_NEAR(interpolate_efficiency(t, 1.0, std::sqrt(1e-9)), 0.55, 1e-12);
}

TEST(InterpolateEfficiency, ClampedOutsideGrid) {
  auto t = grid();
  EXPECT_DOUBLE_EQ(interpolate_efficiency(t, 0.1, 1e-9), 0.10);
  EXPECT_DOUBLE_EQ(interpolate_efficiency(t, 5.0, 1.0), 0.90);
  EXPECT_DOUBLE_EQ(interpolate_efficiency(t, 5.0, 1e-5), 0.45);
  EXPECT_DOUBLE_EQ(interpolate_efficiency(t, 1.0, 0.0), 0.20);
}

TEST(InterpolateEfficiency, RandomQueriesStayInsideCellRange) {
  auto t = grid();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> v(0.5, 2.0), lp(-6, -3);
  for (int k = 0; k < 100; ++k) {
    double vq = v(rng), pq = std::pow(10.0, lp(rng));
    // Locate the surrounding cell independently by linear scan.
    std::size_t i = 0, j = 0;
    while (i + 2 < t.v_in.size() && vq > t.v_in[i + 1]) ++i;
    while (j + 2 < t.p_in.size() && pq > t.p_in[j + 1]) ++j;
    double lo = std::min({t.eta[i][j], t.eta[i + 1][j], t.eta[i][j + 1], t.eta[i + 1][j + 1]});
    double hi = std::max({t.eta[i][j], t.eta[i + 1][j], t.eta[i][j + 1], t.eta[i + 1][j + 1]});
    double e = interpolate_efficiency(t, vq, pq);
    EXPECT_GE(e, lo - 1e-12);
    EXPECT_LE(e, hi + 1e-12);
  }
}

TEST(ConverterSpec, Validation) {
  auto c = em8900_like();
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.v_start = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.efficiency = {{1, 1}, {1e-6}, {{0.5}, {0.5}}};
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.efficiency = EfficiencyTable::flat(1.2);
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.efficiency = {};
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.quiescent_power = -1;
  EXPECT_THROW(bad.validate(), Error);
}
