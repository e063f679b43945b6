#include "test_util.hpp"

#include <cmath>

using namespace pvsoc;
using namespace pvsoc::testing;

TEST(SocAfter, AddsEnergyAsShareOfCapacity) {
  BatterySpec b;
  EXPECT_DOUBLE_EQ(soc_after(50.0, 1000.0, b), 60.0);
  EXPECT_DOUBLE_EQ(soc_after(50.0, 0.0, b), 50.0);
  EXPECT_DOUBLE_EQ(soc_after(95.0, 1000.0, b), 100.0);
  EXPECT_DOUBLE_EQ(soc_after(5.0, -1000.0, b), 0.0);
}

TEST(SocAfter, StaysInRangeAndComposesWithoutClamping) {
  BatterySpec b;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> soc(0.0, 100.0), e(-20000.0, 20000.0);
  for (int i = 0; i < 2000; ++i) {
    const double r = soc_after(soc(rng), e(rng), b);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 100.0);
  }
  // 40 % plus two deposits that stay inside the range
  const double two_steps = soc_after(soc_after(40.0, 1500.0, b), -700.0, b);
  EXPECT_NEAR(two_steps, soc_after(40.0, 800.0, b), 1e-12);
}

TEST(DeltaSoc, HandEvaluatedExamples) {
  EXPECT_NEAR(delta_soc(5000.0, 2000.0, 0.9, 10000.0), 25.0, 1e-12);
  EXPECT_DOUBLE_EQ(delta_soc(0.0, 0.0, 0.9, 10000.0), 0.0);
  EXPECT_NEAR(delta_soc(0.0, 3000.0, 0.9, 10000.0), -30.0, 1e-12);
}

TEST(DeltaSoc, RejectsNonPositiveCapacity) {
  EXPECT_EQ(code_of([] { delta_soc(1.0, 1.0, 0.9, 0.0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { delta_soc(1.0, 1.0, 0.9, -5.0); }), ErrorCode::InvalidArgument);
}

TEST(DeltaSoc, SignAndLinearity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> e(0.0, 8000.0);
  for (int i = 0; i < 500; ++i) {
    const double a = e(rng), b = e(rng);
    EXPECT_GE(delta_soc(a, 0.0, 0.93, 10000.0), 0.0);
    EXPECT_LE(delta_soc(0.0, a, 0.93, 10000.0), 0.0);
    EXPECT_NEAR(delta_soc(a + b, 0.0, 0.93, 10000.0),
                delta_soc(a, 0.0, 0.93, 10000.0) + delta_soc(b, 0.0, 0.93, 10000.0), 1e-9);
  }
}

TEST(DeltaSoc, TripletIsOrderedForConsistentIntervals) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> e(0.0, 6000.0), w(0.0, 2000.0);
  for (int i = 0; i < 1000; ++i) {
    const double pe = e(rng), ce = e(rng);
    const EnergyTriplet pv{std::max(0.0, pe - w(rng)), pe, pe + w(rng)};
    const EnergyTriplet cons{std::max(0.0, ce - w(rng)), ce, ce + w(rng)};
    const auto t = delta_soc_triplet(pv, cons, 0.93, 10000.0);
    EXPECT_LE(t.low, t.exp);
    EXPECT_LE(t.exp, t.up);
    EXPECT_DOUBLE_EQ(t.low, delta_soc(pv.low, cons.up, 0.93, 10000.0));
    EXPECT_DOUBLE_EQ(t.up, delta_soc(pv.up, cons.low, 0.93, 10000.0));
  }
}

TEST(EfficiencyChain, DefaultsSplitRoundTripSymmetrically) {
  EfficiencyChain e;
  BatterySpec b;
  EXPECT_NEAR(e.batt_charge_eff * e.batt_discharge_eff, 0.90, 1e-12);
  EXPECT_NO_THROW(e.validate(b));
  EXPECT_NEAR(e.direct_path(), 0.98 * 0.943, 1e-15);
  EXPECT_NEAR(e.pv_to_battery(), 0.98 * std::sqrt(0.9), 1e-15);
  EXPECT_NEAR(e.battery_to_load(), 0.943 * std::sqrt(0.9), 1e-15);

  auto e80 = EfficiencyChain::with_roundtrip(0.8);
  b.roundtrip_eff = 0.8;
  EXPECT_NO_THROW(e80.validate(b));
  e80.batt_charge_eff = 0.95;
  EXPECT_EQ(code_of([&] { e80.validate(b); }), ErrorCode::Config);
}

TEST(SiteConfig, ValidationRejectsOutOfRangeFields) {
  SiteConfig s;
  EXPECT_NO_THROW(s.validate());
  auto bad = s;
  bad.latitude_deg = 91.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::Config);
  bad = s;
  bad.panel_tilt_deg = -1.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::Config);
  bad = s;
  bad.pv_peak_w = 0.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::Config);
  bad = s;
  bad.battery.capacity_wh = 0.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::Config);
  bad = s;
  bad.battery.soc_hard_min_pct = 100.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::Config);
}

TEST(Time, FormatAndParseRoundTrip) {
  const auto t = hour(2019, 3, 21, 13);
  EXPECT_EQ(format_utc(t), "2019-03-21T13:00:00Z");
  EXPECT_EQ(parse_utc("2019-03-21T13:00:00Z"), t);
  EXPECT_FALSE(parse_utc("2019-03-21T13:30:00Z"));
  EXPECT_FALSE(parse_utc("2019-02-30T13:00:00Z"));
  EXPECT_FALSE(parse_utc("2019-03-21 13:00:00"));
  EXPECT_EQ(format_date(day(2020, 2, 29)), "2020-02-29");
  EXPECT_EQ(weekday_index(day(2019, 1, 1)), 1);  // a Tuesday
  EXPECT_EQ(weekday_index(day(2019, 1, 6)), 6);  // a Sunday
}

TEST(HourlyTimeSeries, IndexingAndValidation) {
  auto s = energy(hour(2019, 1, 1), {1, 2, 3});
  EXPECT_EQ(s.index_of(hour(2019, 1, 1, 2)), 2u);
  EXPECT_FALSE(s.index_of(hour(2019, 1, 1, 3)));
  EXPECT_FALSE(s.index_of(hour(2018, 12, 31, 23)));
  EXPECT_EQ(s.end(), hour(2019, 1, 1, 3));
  EXPECT_NO_THROW(s.validate());
  s.values[1] = -0.5;
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::InvalidArgument);
  HourlyTimeSeries soc{hour(2019, 1, 1), {50, 101}, SeriesKind::SocPct};
  EXPECT_EQ(code_of([&] { soc.validate(); }), ErrorCode::InvalidArgument);
}
