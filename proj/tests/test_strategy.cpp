#include <random>

#include "pvsoc/strategy.hpp"
#include "test_util.hpp"

using namespace pvsoc;
using namespace pvsoc::strategy;
using pvsoc::testing::code_of;
using pvsoc::testing::hour;

namespace {

const StrategyParams kParams{60.0, 10000.0, 0.93};

// Surplus 07:00-15:00 (2000 Wh PV), deficit 15:00-19:00, nothing at night.
ForecastPair single_peak(double load_wh = 500.0) {
  std::vector<double> pv(24, 0.0), load(24, 0.0);
  for (int h = 7; h < 15; ++h) pv[h] = 2000.0;
  for (int h = 15; h < 19; ++h) load[h] = load_wh;
  return {EnergyForecast::exact(hour(2019, 6, 1), load), EnergyForecast::exact(hour(2019, 6, 1), pv)};
}

// Rate fixture from a list of (first, last, rate) runs over 24 h.
std::vector<double> rates(std::initializer_list<std::tuple<int, int, double>> runs) {
  std::vector<double> r(24, 0.0);
  for (auto [a, b, v] : runs)
    for (int h = a; h < b; ++h) r[h] = v;
  return r;
}

}  // namespace

TEST(DetectPeriodsTest, SinglePeakFixture) {
  const auto p = detect_periods(single_peak(), kParams);
  EXPECT_EQ(p.t_sc, 7);
  EXPECT_EQ(p.t_ec, 15);
  EXPECT_EQ(p.t_sd, 15);
  EXPECT_EQ(p.t_ed, 19);
  EXPECT_TRUE(p.has_charge_window());
}

TEST(DetectPeriodsTest, AllDeficitDay) {
  const auto p = detect_periods(rates({{0, 24, -1.0}}));
  EXPECT_FALSE(p.has_charge_window());
  EXPECT_EQ(p.t_ed, 24);
}

TEST(DetectPeriodsTest, CloudGapRunWithLargestRateWins) {
  const auto later = detect_periods(rates({{6, 10, 2.0}, {10, 12, -1.0}, {12, 15, 5.0}, {15, 19, -3.0}}));
  EXPECT_EQ(later.t_sc, 12);
  EXPECT_EQ(later.t_ec, 15);
  EXPECT_EQ(later.t_ed, 19);

  const auto earlier = detect_periods(rates({{6, 10, 6.0}, {10, 12, -1.0}, {12, 15, 5.0}, {15, 19, -3.0}}));
  EXPECT_EQ(earlier.t_sc, 6);
  EXPECT_EQ(earlier.t_ec, 10);
  EXPECT_EQ(earlier.t_ed, 12);
}

TEST(DetectPeriodsTest, DeadBandHoursDoNotSplitRuns) {
  // Quiet hours between the surplus and the deficit are skipped.
  const auto p = detect_periods(rates({{8, 14, 3.0}, {14, 16, 0.05}, {16, 20, -2.0}}));
  EXPECT_EQ(p.t_ec, 14);
  EXPECT_EQ(p.t_ed, 20);
  // Surplus running to the horizon end leaves no discharge period.
  const auto q = detect_periods(rates({{20, 24, 3.0}}));
  EXPECT_EQ(q.t_sc, 20);
  EXPECT_EQ(q.t_ec, 24);
  EXPECT_EQ(q.t_ed, 24);
}

TEST(DetectPeriodsTest, TomorrowsSunnierRunDoesNotDisplaceToday) {
  std::vector<double> r(30, -0.5);
  for (int h = 2; h < 6; ++h) r[h] = 2.0;    // today's remaining surplus
  for (int h = 22; h < 28; ++h) r[h] = 9.0;  // brighter tomorrow, after a long night
  const auto p = detect_periods(r);
  EXPECT_EQ(p.t_sc, 2);
  EXPECT_EQ(p.t_ec, 6);
  EXPECT_EQ(p.t_ed, 22);
}

TEST(SetpointTest, GoalExamples) {
  EXPECT_DOUBLE_EQ(compute_soc_low_goal(kParams, {-40.0, -30.0, -20.0}), 70.0);
  EXPECT_DOUBLE_EQ(compute_soc_low_goal(kParams, {-30.0, -30.0, -30.0}), 60.0);
  EXPECT_DOUBLE_EQ(compute_soc_low_goal({90.0, 1e4, 0.93}, {-40.0, -10.0, 0.0}), 100.0);
}

TEST(SetpointTest, ZeroWidthIntervalGivesTheLimitExactly) {
  // Sweep grid values with a discharge that does not round-trip through addition.
  for (double limit : {20.0 + 80.0 / 39.0, 20.0 + 7 * 80.0 / 39.0, 64.1, 99.9}) {
    for (double dis : {-30.3, -0.1, -47.123456789}) {
      const StrategyParams p{limit, 1e4, 0.93};
      EXPECT_EQ(compute_soc_low_goal(p, {dis, dis, dis}), limit) << limit << " " << dis;
    }
  }
}

TEST(SetpointTest, CapExamples) {
  EXPECT_DOUBLE_EQ(compute_soc_up_limit(70.0, -30.0), 100.0);
  EXPECT_DOUBLE_EQ(compute_soc_up_limit(62.0, -25.0), 87.0);
  EXPECT_DOUBLE_EQ(compute_soc_up_limit(62.0, 0.0), 62.0);
  EXPECT_EQ(code_of([] { compute_soc_up_limit(62.0, 1.0); }), ErrorCode::InvalidArgument);
}

TEST(SetpointTest, ShouldStartExamples) {
  EXPECT_TRUE(should_start_charging(50.0, 90.0, 35.0));
  EXPECT_FALSE(should_start_charging(50.0, 90.0, 60.0));
  EXPECT_FALSE(should_start_charging(90.0, 90.0, 0.0));
  EXPECT_FALSE(should_start_charging(95.0, 90.0, -10.0));
}

TEST(DecideTest, DecisionTable) {
  DaySetpoints sp;
  sp.soc_low_goal_pct = 65.0;
  sp.soc_up_limit_pct = 90.0;
  sp.t_start_charge = 5;
  EXPECT_EQ(decide(55.0, sp, kParams), (ChargeCommand{ChargeMode::SafeguardCharge, 100.0}));
  EXPECT_EQ(decide(70.0, sp, kParams, 2), (ChargeCommand{ChargeMode::HoldCurtailAboveCap, 70.0}));
  EXPECT_EQ(decide(70.0, sp, kParams, 2, true), (ChargeCommand{ChargeMode::ChargeFromSurplus, 90.0}));
  EXPECT_EQ(decide(70.0, sp, kParams, 5), (ChargeCommand{ChargeMode::ChargeFromSurplus, 90.0}));
  // Safeguard dominates even with the latch set.
  EXPECT_EQ(decide(59.9, sp, kParams, 9, true).mode, ChargeMode::SafeguardCharge);
}

TEST(DecideTest, GreedyAlwaysChargesToFull) {
  for (double soc : {0.0, 42.0, 99.0, 100.0})
    EXPECT_EQ(greedy_decision(soc), (ChargeCommand{ChargeMode::ChargeFromSurplus, 100.0}));
  EXPECT_STREQ(to_string(ChargeMode::HoldCurtailAboveCap), "hold");
}

TEST(PlanTest, ZeroUncertaintySinglePeak) {
  // Discharge 4 x 500 Wh = -20 %; goal = limit, cap = 80.
  const auto sp = plan(single_peak(), kParams, 60.0);
  EXPECT_DOUBLE_EQ(sp.soc_low_goal_pct, 60.0);
  EXPECT_NEAR(sp.soc_up_limit_pct, 80.0, 1e-12);
  EXPECT_NEAR(sp.discharge.exp, -20.0, 1e-12);
  // Each sunny hour adds 18.6 %. Hour h may be skipped while the hours
  // after it still fill the cap: 60 + (14 - h) * 18.6 >= 80 holds up to
  // h = 12, so charging starts at 13 and the cap binds in hour 14.
  EXPECT_EQ(sp.t_start_charge, 13);
  EXPECT_GT(sp.t_start_charge, sp.periods.t_sc);
}

TEST(PlanTest, LimitHundredStartsAtFirstSurplusHour) {
  const auto sp = plan(single_peak(), {100.0, 10000.0, 0.93}, 60.0);
  EXPECT_DOUBLE_EQ(sp.soc_low_goal_pct, 100.0);
  EXPECT_DOUBLE_EQ(sp.soc_up_limit_pct, 100.0);
  EXPECT_EQ(sp.t_start_charge, 7);
}

TEST(PlanTest, NoSunForecast) {
  std::vector<double> load(24, 100.0);
  const ForecastPair f{EnergyForecast::exact(hour(2019, 6, 1), load),
                       EnergyForecast::exact(hour(2019, 6, 1), std::vector<double>(24, 0.0))};
  const auto sp = plan(f, kParams, 80.0);
  EXPECT_FALSE(sp.periods.has_charge_window());
  EXPECT_DOUBLE_EQ(sp.soc_low_goal_pct, 60.0);
  EXPECT_DOUBLE_EQ(sp.soc_up_limit_pct, sp.soc_low_goal_pct);
}

TEST(PlanTest, GoalAddsDischargeForecastError) {
  auto f = single_peak(600.0);
  // Load bounds +-200 Wh per hour, comonotone: exp - low over the period is
  // (2400 + 800 - 2400) Wh -> 8 %.
  for (int h = 15; h < 19; ++h) f.load.hourly[h] = {400.0, 600.0, 800.0};
  const auto sp = plan(f, kParams, 60.0);
  EXPECT_NEAR(sp.discharge.exp, -24.0, 1e-12);
  EXPECT_NEAR(sp.discharge.low, -32.0, 1e-12);
  EXPECT_NEAR(sp.soc_low_goal_pct, 68.0, 1e-12);
  EXPECT_NEAR(sp.soc_up_limit_pct, 92.0, 1e-12);
}

TEST(PlanTest, OrderingChainAndMonotoneCaps) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EnergyTriplet> pv(24), load(24);
    for (int h = 0; h < 24; ++h) {
      const double sun = (h >= 6 && h < 18) ? 3000.0 * u(rng) : 0.0;
      pv[h] = {0.7 * sun, sun, std::min(1.3 * sun, 4000.0)};
      const double l = 1500.0 * u(rng);
      load[h] = {0.8 * l, l, 1.2 * l};
    }
    ForecastPair f;
    f.pv.hourly = pv;
    f.load.hourly = load;
    double prev_cap = -1.0;
    for (int limit = 0; limit <= 100; limit += 5) {
      const StrategyParams p{double(limit), 10000.0, 0.93};
      const auto sp = plan(f, p, 100.0 * u(rng));
      EXPECT_LE(p.soc_low_limit_pct, sp.soc_low_goal_pct);
      EXPECT_LE(sp.soc_low_goal_pct, sp.soc_up_limit_pct);
      EXPECT_LE(sp.soc_up_limit_pct, 100.0);
      EXPECT_GE(sp.soc_up_limit_pct, prev_cap);
      prev_cap = sp.soc_up_limit_pct;
      const auto& q = sp.periods;
      EXPECT_TRUE(q.t_sc <= q.t_ec && q.t_ec == q.t_sd && q.t_sd <= q.t_ed && q.t_ed <= 24);
    }
  }
}

TEST(StrategyParamsTest, SiteDerivedAndValidated) {
  SiteConfig site;
  const auto p = StrategyParams::for_site(site, 65.0);
  EXPECT_DOUBLE_EQ(p.e_batt_wh, site.battery.capacity_wh);
  EXPECT_NEAR(p.eta_charge, 0.98 * std::sqrt(0.9), 1e-12);
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(code_of([] { StrategyParams{101.0, 1.0, 1.0}.validate(); }), ErrorCode::Config);
  EXPECT_EQ(code_of([] { StrategyParams{50.0, 0.0, 1.0}.validate(); }), ErrorCode::Config);
}
