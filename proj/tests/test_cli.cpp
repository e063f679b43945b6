// End-to-end checks that run the simctl binary.

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SIMCTL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// Generates a fleet with `simctl synth` and returns the written config.
fs::path synth_fleet(const std::string& name, const std::string& profile, int days, int systems,
                     std::uint64_t seed = 5) {
  const auto dir = pvsoc::testing::scratch_dir(name);
  const json seed_cfg = {{"seed", seed},
                         {"synth", {{"profile", profile}, {"days", days}, {"systems", systems}}},
                         {"sweep", {{"count", 3}}},
                         {"output_dir", "fleet"}};
  std::ofstream(dir / "seed.json") << seed_cfg.dump();
  EXPECT_EQ(run("synth --config " + (dir / "seed.json").string()), 0);
  return dir / "fleet" / "config.json";
}

}  // namespace

TEST(CliTest, SynthIsDeterministic) {
  const auto a = synth_fleet("cli_synth_a", "market_like", 21, 1);
  const auto b = synth_fleet("cli_synth_b", "market_like", 21, 1);
  EXPECT_EQ(slurp(a.parent_path() / "sys1" / "telemetry.csv"),
            slurp(b.parent_path() / "sys1" / "telemetry.csv"));
  EXPECT_EQ(slurp(a.parent_path() / "sys1" / "irradiance.csv"),
            slurp(b.parent_path() / "sys1" / "irradiance.csv"));
  const auto cfg = read_json(a);
  EXPECT_EQ(cfg["systems"].size(), 1u);
}

TEST(CliTest, GreedyAndLimitHundredWriteIdenticalKpis) {
  const auto cfg = synth_fleet("cli_equiv", "market_like", 60, 1);
  const auto out = cfg.parent_path();
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --strategy greedy --out " + (out / "g").string()), 0);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --strategy forecast --limit 100 --out " +
                (out / "f").string()),
            0);
  const auto g = read_json(out / "g" / "sys1" / "kpi.json");
  const auto f = read_json(out / "f" / "sys1" / "kpi.json");
  EXPECT_EQ(g["kpi"], f["kpi"]);
  EXPECT_EQ(g["config_hash"], f["config_hash"]);
  EXPECT_TRUE(fs::exists(out / "f" / "sys1" / "setpoints.csv"));
  EXPECT_EQ(slurp(out / "g" / "sys1" / "trajectory.csv"), slurp(out / "f" / "sys1" / "trajectory.csv"));
}

TEST(CliTest, HighLoadForecastCutsFullChargeHours) {
  const auto cfg = synth_fleet("cli_highload", "high_load", 90, 1);
  const auto out = cfg.parent_path();
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --strategy greedy --out " + (out / "g").string()), 0);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --limit 60 --out " + (out / "f").string()), 0);
  const double g = read_json(out / "g" / "sys1" / "kpi.json")["kpi"]["full_charge_hours_per_day"];
  const double f = read_json(out / "f" / "sys1" / "kpi.json")["kpi"]["full_charge_hours_per_day"];
  EXPECT_GT(g, 0.0);
  EXPECT_LT(f, 0.75 * g);
}

TEST(CliTest, ForecastWritesDayAndAccuracy) {
  const auto cfg = synth_fleet("cli_forecast", "market_like", 60, 1);
  const auto out = cfg.parent_path() / "fc";
  ASSERT_EQ(run("forecast --config " + cfg.string() + " --date 2019-02-20 --out " + out.string()), 0);
  std::ifstream in(out / "sys1" / "forecast_2019-02-20.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "timestamp,load_low_wh,load_exp_wh,load_up_wh,pv_low_wh,pv_exp_wh,pv_up_wh");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 24);
  const auto acc = read_json(out / "sys1" / "forecast_2019-02-20_accuracy.json");
  // A weekday of the market profile averages about 470 Wh per hour; the
  // generator's hourly noise is 15 % with a 10 % day factor.
  EXPECT_LT(acc["load"]["rmse_wh"].get<double>(), 250.0);
  EXPECT_EQ(acc["load"]["hours"], 24);
  EXPECT_LT(acc["pv"]["hours"].get<int>(), 24);  // full-battery hours are excluded
}

TEST(CliTest, SweepWritesReportAndPlots) {
  const auto cfg = synth_fleet("cli_sweep", "market_like", 30, 2);
  const auto out = cfg.parent_path() / "sw";
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --out " + out.string()), 0);
  std::ifstream in(out / "sweep.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);  // 3 limits x 2 systems
  EXPECT_TRUE(fs::exists(out / "report.json"));
  for (const char* f : {"outages_by_limit.csv", "avg_soc_by_limit.csv", "full_charge_by_limit.csv",
                        "baseline.csv", "fan_soc_sys1_greedy.csv", "fan_load_sys2.csv"})
    EXPECT_TRUE(fs::exists(out / "plots" / f)) << f;
}

TEST(CliTest, ExitCodes) {
  const auto dir = pvsoc::testing::scratch_dir("cli_errors");
  // Usage errors.
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("simulate"), 2);
  EXPECT_EQ(run("fly --config x"), 2);
  // Missing config and missing input files are configuration errors.
  EXPECT_EQ(run("simulate --config " + (dir / "nope.json").string()), 2);
  const json missing = {{"seed", 1},
                        {"systems", {{{"id", "a"}, {"telemetry", "t.csv"}, {"irradiance", "i.csv"}}}}};
  std::ofstream(dir / "missing.json") << missing.dump();
  EXPECT_EQ(run("simulate --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run("simulate --config " + (dir / "missing.json").string() + " --limit 120"), 2);

  // Ten days of history cannot be clustered: a data error.
  const auto short_cfg = synth_fleet("cli_short", "market_like", 10, 1);
  EXPECT_EQ(run("forecast --config " + short_cfg.string() + " --date 2019-01-05"), 3);

  // Malformed telemetry is a data error as well.
  const auto bad = dir / "bad";
  fs::create_directories(bad);
  std::ofstream(bad / "t.csv") << "timestamp,pv_energy_wh,cons_energy_wh,soc_pct\nnot-a-date,1,2,3\n";
  std::ofstream(bad / "i.csv") << "timestamp,ghi_wh_m2,source\n";
  std::ofstream(bad / "c.json") << json{{"seed", 1},
                                         {"systems", {{{"id", "a"}, {"telemetry", "t.csv"},
                                                       {"irradiance", "i.csv"}}}}}
                                       .dump();
  EXPECT_EQ(run("simulate --config " + (bad / "c.json").string()), 3);
}
