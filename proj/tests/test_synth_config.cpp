#include <cmath>
#include <fstream>
#include <numeric>

#include "pvsoc/config.hpp"
#include "pvsoc/synth.hpp"
#include "test_util.hpp"

using namespace pvsoc;
using pvsoc::testing::code_of;
using pvsoc::testing::day;

namespace {

synth::SynthOptions opts(synth::Profile p, int days, std::uint64_t seed = 1) {
  synth::SynthOptions o;
  o.profile = p;
  o.days = days;
  o.seed = seed;
  return o;
}

// Daily totals of a series that starts at midnight.
std::vector<double> daily(const HourlyTimeSeries& s) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 24 <= s.size(); i += 24) {
    double t = 0.0;
    for (int h = 0; h < 24; ++h) t += s[i + h];
    out.push_back(t);
  }
  return out;
}

nlohmann::json config_for(const std::string& tel, const std::string& irr) {
  return {{"seed", 7},
          {"systems", {{{"id", "s1"}, {"telemetry", tel}, {"irradiance", irr}}}}};
}

}  // namespace

TEST(SynthTest, HaurwitzClearSky) {
  EXPECT_EQ(synth::haurwitz_ghi(0.0), 0.0);
  EXPECT_EQ(synth::haurwitz_ghi(-0.3), 0.0);
  EXPECT_NEAR(synth::haurwitz_ghi(1.0), 1098.0 * std::exp(-0.057), 1e-9);
}

TEST(SynthTest, ProfileNames) {
  for (auto p : {synth::Profile::MarketLike, synth::Profile::SinglePeak, synth::Profile::HighLoad})
    EXPECT_EQ(synth::parse_profile(synth::to_string(p)), p);
  EXPECT_EQ(code_of([] { synth::parse_profile("bakery"); }), ErrorCode::Config);
}

TEST(SynthTest, DeterministicPerSeed) {
  const auto a = synth::generate(opts(synth::Profile::MarketLike, 30, 5));
  const auto b = synth::generate(opts(synth::Profile::MarketLike, 30, 5));
  const auto c = synth::generate(opts(synth::Profile::MarketLike, 30, 6));
  EXPECT_EQ(a.load.values, b.load.values);
  EXPECT_EQ(a.ghi_forecast.values, b.ghi_forecast.values);
  EXPECT_NE(a.load.values, c.load.values);
}

TEST(SynthTest, MarketSundayIsQuietAndYearMatchesTarget) {
  auto o = opts(synth::Profile::MarketLike, 364);
  o.site.timezone_offset_h = 0.0;  // days align with UTC midnight
  const auto s = synth::generate(o);
  const auto d = daily(s.load);
  double sunday = 0.0, weekday = 0.0;
  int ns = 0, nw = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (weekday_index(o.start + std::chrono::days(i)) == 6) {
      sunday += d[i];
      ++ns;
    } else {
      weekday += d[i];
      ++nw;
    }
  }
  EXPECT_LT(sunday / ns, 0.3 * weekday / nw);
  const double annual_kwh = std::accumulate(d.begin(), d.end(), 0.0) / 1000.0 * 365.0 / 364.0;
  EXPECT_NEAR(annual_kwh, 3500.0, 350.0);
}

TEST(SynthTest, SinglePeakHasOneSurplusRunPerDay) {
  auto o = opts(synth::Profile::SinglePeak, 20);
  const auto s = synth::generate(o);
  const double direct = o.site.eff.direct_path();
  const int off = static_cast<int>(std::lround(o.site.timezone_offset_h));
  // Runs counted per local day; local midnight is hour 24 - off in UTC.
  for (std::size_t start = 24 - off; start + 24 <= s.load.size(); start += 24) {
    int runs = 0;
    bool in_run = false;
    for (std::size_t i = start; i < start + 24; ++i) {
      const bool surplus = s.pv_potential[i] * direct > s.load[i];
      if (surplus && !in_run) ++runs;
      in_run = surplus;
    }
    EXPECT_EQ(runs, 1) << start;
  }
  // Noiseless profile: forecast GHI is the analysis GHI.
  EXPECT_EQ(s.ghi_forecast.values, s.ghi_analysis.values);
}

TEST(SynthTest, TelemetryIsConsistentWithPotential) {
  const auto o = opts(synth::Profile::HighLoad, 40, 3);
  const auto s = synth::generate(o);
  ASSERT_EQ(s.telemetry.size(), s.load.size());
  ASSERT_EQ(s.irradiance.size(), 2 * s.load.size());
  for (std::size_t i = 0; i < s.load.size(); ++i) {
    EXPECT_LE(s.telemetry[i].pv_energy_wh, s.pv_potential[i] + 1e-9);
    EXPECT_LE(s.pv_potential[i], o.site.pv_peak_w);
    EXPECT_GE(s.telemetry[i].soc_pct, 0.0);
    EXPECT_LE(s.telemetry[i].soc_pct, 100.0);
    if (s.ghi_analysis[i] == 0.0) EXPECT_EQ(s.pv_potential[i], 0.0);
  }
  EXPECT_EQ(code_of([&] {
              auto bad = o;
              bad.days = 0;
              synth::generate(bad);
            }),
            ErrorCode::Config);
}

TEST(ConfigTest, MinimalDocumentUsesDefaults) {
  const auto c = config::parse_config(nlohmann::json{{"seed", 3}}, "/base");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.strategy, simulator::StrategySpec::Kind::Forecast);
  EXPECT_DOUBLE_EQ(c.soc_low_limit_pct, 65.0);
  EXPECT_EQ(c.sweep.count, 40);
  EXPECT_EQ(c.load.clustering.seed, 3u);
  EXPECT_EQ(c.load.clustering.day_offset_h, 1);
  EXPECT_EQ(c.output_dir, std::filesystem::path("/base/out"));
  EXPECT_TRUE(c.systems.empty());
}

TEST(ConfigTest, FieldsAndRelativePaths) {
  nlohmann::json j = config_for("a/tel.csv", "a/irr.csv");
  j["site"] = {{"latitude_deg", 10.5}, {"timezone_offset_h", -3}, {"battery", {{"capacity_wh", 5000}}}};
  j["strategy"] = {{"kind", "greedy"}, {"soc_low_limit_pct", 40}};
  j["forecast"] = {{"order_grid", {{1, 0, 0}, {0, 1, 1}}}};
  j["span"] = {{"start", "2019-02-01"}, {"end", "2019-02-28"}};
  const auto c = config::parse_config(j, "/data");
  EXPECT_DOUBLE_EQ(c.site.latitude_deg, 10.5);
  EXPECT_DOUBLE_EQ(c.site.battery.capacity_wh, 5000.0);
  EXPECT_EQ(c.load.clustering.day_offset_h, -3);
  EXPECT_EQ(c.strategy, simulator::StrategySpec::Kind::Greedy);
  ASSERT_EQ(c.load.order_grid.size(), 2u);
  EXPECT_EQ(c.load.order_grid[1], (forecast_load::ArimaOrder{0, 1, 1}));
  EXPECT_EQ(*c.span_start, day(2019, 2, 1));
  EXPECT_EQ(*c.span_end, day(2019, 2, 28));
  ASSERT_EQ(c.systems.size(), 1u);
  EXPECT_EQ(c.systems[0].telemetry, std::filesystem::path("/data/a/tel.csv"));
}

TEST(ConfigTest, SchemaErrors) {
  const auto code = [](nlohmann::json j) {
    return code_of([&] { config::parse_config(j); });
  };
  EXPECT_EQ(code({{"site", nlohmann::json::object()}}), ErrorCode::Config);  // no seed
  EXPECT_EQ(code({{"seed", "x"}}), ErrorCode::Config);
  EXPECT_EQ(code({{"seed", 1}, {"strategy", {{"kind", "magic"}}}}), ErrorCode::Config);
  EXPECT_EQ(code({{"seed", 1}, {"strategy", {{"soc_low_limit_pct", 120}}}}), ErrorCode::Config);
  EXPECT_EQ(code({{"seed", 1}, {"forecast", {{"order_grid", {{1, 2}}}}}}), ErrorCode::Config);
  EXPECT_EQ(code({{"seed", 1}, {"span", {{"start", "2019-13-01"}}}}), ErrorCode::Config);
  EXPECT_EQ(code({{"seed", 1}, {"span", {{"start", "2019-03-01"}, {"end", "2019-02-01"}}}}),
            ErrorCode::Config);
  EXPECT_EQ(code({{"seed", 1}, {"systems", {{{"id", "a,b"}}}}}), ErrorCode::Config);
  EXPECT_EQ(code({{"seed", 1}, {"synth", {{"profile", "nope"}}}}), ErrorCode::Config);
  EXPECT_EQ(code({{"seed", 1}, {"site", 5}}), ErrorCode::Config);
}

TEST(ConfigTest, HashIsStableAndSensitive) {
  EXPECT_EQ(config::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(config::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  const auto a = config::parse_config(nlohmann::json{{"seed", 1}, {"output_dir", "x"}});
  const auto b = config::parse_config(nlohmann::json{{"output_dir", "x"}, {"seed", 1}});
  const auto c = config::parse_config(nlohmann::json{{"seed", 2}, {"output_dir", "x"}});
  EXPECT_EQ(config::config_hash(a), config::config_hash(b));
  EXPECT_NE(config::config_hash(a), config::config_hash(c));
  EXPECT_EQ(config::config_hash(a).size(), 16u);
}

TEST(ConfigTest, LoadAndValidateInputs) {
  const auto dir = pvsoc::testing::scratch_dir("config_load");
  EXPECT_EQ(code_of([&] { config::load_config(dir / "missing.json"); }), ErrorCode::Config);
  std::ofstream(dir / "broken.json") << "{ seed: ";
  EXPECT_EQ(code_of([&] { config::load_config(dir / "broken.json"); }), ErrorCode::Config);

  std::ofstream(dir / "cfg.json") << config_for("tel.csv", "irr.csv").dump();
  const auto cfg = config::load_config(dir / "cfg.json");
  EXPECT_EQ(cfg.systems[0].telemetry, dir / "tel.csv");
  EXPECT_EQ(code_of([&] { config::validate_inputs(cfg); }), ErrorCode::Config);
  EXPECT_EQ(code_of([] { config::validate_inputs(config::parse_config({{"seed", 1}})); }),
            ErrorCode::Config);
}

TEST(PrepareSystemTest, FitsSynthesizedSystem) {
  const auto dir = pvsoc::testing::scratch_dir("prepare_ok");
  auto o = opts(synth::Profile::MarketLike, 60, 11);
  const auto s = synth::generate(o);
  const auto [tel, irr] = synth::write_system(s, dir);
  auto j = config_for(tel.string(), irr.string());
  j["span"] = {{"start", "2019-02-01"}, {"end", "2019-02-10"}};
  const auto cfg = config::parse_config(j);
  const auto p = config::prepare_system(cfg.systems[0], cfg);
  EXPECT_EQ(p.id, "s1");
  EXPECT_NEAR(p.pv_model.slope, o.plant_slope, 0.05 * o.plant_slope);
  EXPECT_GE(p.pv_forecast_model.residual_std, p.pv_model.residual_std);
  EXPECT_EQ(p.sim_load.size(), 10u * 24u);
  EXPECT_EQ(p.sim_pv_potential.start, p.sim_load.start);
  const auto i0 = *s.load.index_of(p.sim_load.start);
  EXPECT_NEAR(p.sim_load[0], s.load[i0], 1e-3);
  ASSERT_NE(p.forecasts, nullptr);
  EXPECT_NO_THROW(p.forecasts->horizon(p.sim_load.start).load.check_ordered());
  EXPECT_GE(p.initial_soc_pct, 0.0);
  EXPECT_LE(p.initial_soc_pct, 100.0);
}

TEST(PrepareSystemTest, ShortHistoryIsInsufficient) {
  const auto dir = pvsoc::testing::scratch_dir("prepare_short");
  const auto s = synth::generate(opts(synth::Profile::MarketLike, 10));
  const auto [tel, irr] = synth::write_system(s, dir);
  const auto cfg = config::parse_config(config_for(tel.string(), irr.string()));
  EXPECT_EQ(code_of([&] { config::prepare_system(cfg.systems[0], cfg); }),
            ErrorCode::InsufficientHistory);
}
