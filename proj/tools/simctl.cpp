// simctl: forecast | simulate | sweep | synth
//
// Exit codes: 0 ok, 2 config or validation error, 3 data error,
// 4 internal invariant breach.

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include "pvsoc/analysis.hpp"
#include "pvsoc/config.hpp"
#include "pvsoc/ingest.hpp"
#include "pvsoc/synth.hpp"

namespace fs = std::filesystem;
using namespace pvsoc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::InvalidArgument: return kExitConfig;
    case ErrorCode::InvariantBreach: return kExitInternal;
    default: return kExitData;
  }
}

struct Overrides {
  fs::path config;
  std::optional<double> limit;
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<std::string> date;
};

config::RunConfig resolve(const Overrides& o) {
  auto cfg = config::load_config(o.config);
  if (o.limit) {
    if (!(*o.limit >= 0.0 && *o.limit <= 100.0))
      throw Error(ErrorCode::Config, "--limit must be in [0, 100]");
    cfg.soc_low_limit_pct = *o.limit;
  }
  if (o.strategy) {
    if (*o.strategy == "greedy") cfg.strategy = simulator::StrategySpec::Kind::Greedy;
    else if (*o.strategy == "forecast") cfg.strategy = simulator::StrategySpec::Kind::Forecast;
    else throw Error(ErrorCode::Config, "--strategy must be greedy or forecast");
  }
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.load.clustering.seed = *o.seed;
  }
  if (o.out) cfg.output_dir = *o.out;
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
  return out;
}

nlohmann::json kpi_json(const analysis::KpiReport& k) {
  return {{"pv_generation_wh", k.pv_generation_wh},
          {"consumption_wh", k.consumption_wh},
          {"avg_system_efficiency", k.avg_system_efficiency},
          {"soc_ci_75", {k.soc_ci_lo, k.soc_ci_hi}},
          {"direct_consumption_rate", k.direct_consumption_rate},
          {"capacity_factor", k.capacity_factor},
          {"outage_hours", k.outage_hours},
          {"avg_soc_pct", k.avg_soc_pct},
          {"full_charge_hours_per_day", k.full_charge_hours_per_day}};
}

// Energy balance and SOC range over a whole run.
void check_invariants(const simulator::ScenarioResult& r, const SiteConfig& site) {
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const double res = simulator::balance_residual(r.inputs[i], r.steps[i], site);
    const double soc = r.steps[i].soc_end_pct;
    if (!(res < 1e-6) || !(soc >= 0.0 && soc <= 100.0))
      throw Error(ErrorCode::InvariantBreach,
                  "energy balance or SOC range violated at hour " + std::to_string(i));
  }
}

// ------------------------------------------------------------------ forecast

struct ErrorStats {
  double mae = 0.0;
  double rmse = 0.0;
  int n = 0;
};

ErrorStats error_stats(const std::vector<double>& pred, const std::vector<double>& truth,
                       const std::vector<bool>& use) {
  ErrorStats s;
  double sq = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!use[i]) continue;
    const double e = pred[i] - truth[i];
    s.mae += std::fabs(e);
    sq += e * e;
    ++s.n;
  }
  if (s.n > 0) {
    s.mae /= s.n;
    s.rmse = std::sqrt(sq / s.n);
  }
  return s;
}

int cmd_forecast(const Overrides& o) {
  const auto cfg = resolve(o);
  config::validate_inputs(cfg);
  if (!o.date) throw Error(ErrorCode::Config, "forecast needs --date YYYY-MM-DD");
  const auto day = parse_date(*o.date);
  if (!day) throw Error(ErrorCode::Config, "--date must be YYYY-MM-DD");

  for (const auto& files : cfg.systems) {
    const auto sys = config::prepare_system(files, cfg);
    const auto& model = sys.forecasts->load_model();
    const auto load = model.forecast_load_24h(sys.load, *day);

    const UtcHour first = UtcHour{*day} - std::chrono::hours(cfg.load.clustering.day_offset_h);
    const auto gi = sys.ghi_forecast.index_of(first);
    if (!gi || *gi + 24 > sys.ghi_forecast.size())
      throw Error(ErrorCode::InsufficientData, "no GHI forecast for " + *o.date);
    const std::span<const double> ghi(sys.ghi_forecast.values.data() + *gi, 24);
    const auto pv = forecast_pv::forecast_pv_24h(sys.pv_forecast_model, first, ghi, cfg.pv_z);

    const fs::path dir = cfg.output_dir / files.id;
    fs::create_directories(dir);
    auto out = open_out(dir / ("forecast_" + *o.date + ".csv"));
    out << "timestamp,load_low_wh,load_exp_wh,load_up_wh,pv_low_wh,pv_exp_wh,pv_up_wh\n";
    for (int h = 0; h < 24; ++h) {
      const auto& l = load.hourly[h];
      const auto& p = pv.hourly[h];
      out << format_utc(first + std::chrono::hours(h)) << ',' << l.low << ',' << l.exp << ','
          << l.up << ',' << p.low << ',' << p.exp << ',' << p.up << '\n';
    }

    // Accuracy against telemetry, when the day is inside it. PV is compared
    // only where the battery was not full, since full hours are curtailed.
    const auto ti = sys.load.index_of(first);
    if (ti && *ti + 24 <= sys.load.size()) {
      std::vector<double> lp(24), lt(24), pp(24), pt(24);
      std::vector<bool> all(24, true), uncurtailed(24);
      for (int h = 0; h < 24; ++h) {
        lp[h] = load.hourly[h].exp;
        lt[h] = sys.load[*ti + h];
        pp[h] = pv.hourly[h].exp;
        pt[h] = sys.pv_telemetry[*ti + h];
        uncurtailed[h] = sys.soc_telemetry[*ti + h] < 100.0;
      }
      const auto le = error_stats(lp, lt, all);
      const auto pe = error_stats(pp, pt, uncurtailed);
      const nlohmann::json acc = {
          {"date", *o.date},
          {"load", {{"mae_wh", le.mae}, {"rmse_wh", le.rmse}, {"hours", le.n}}},
          {"pv", {{"mae_wh", pe.mae}, {"rmse_wh", pe.rmse}, {"hours", pe.n}}}};
      open_out(dir / ("forecast_" + *o.date + "_accuracy.json")) << acc.dump(2) << '\n';
      std::cout << files.id << ": load RMSE " << le.rmse << " Wh, PV RMSE " << pe.rmse
                << " Wh over " << pe.n << " uncurtailed hours\n";
    }
  }
  return 0;
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const Overrides& o) {
  const auto cfg = resolve(o);
  config::validate_inputs(cfg);
  simulator::StrategySpec spec;
  spec.kind = cfg.strategy;
  spec.params = strategy::StrategyParams::for_site(cfg.site, cfg.soc_low_limit_pct);

  for (const auto& files : cfg.systems) {
    const auto sys = config::prepare_system(files, cfg);
    simulator::ScenarioOptions opt;
    opt.initial_soc_pct = sys.initial_soc_pct;
    opt.eps_pct_per_h = cfg.dead_band_pct_per_h;
    const auto run = simulator::run_scenario(sys.sim_pv_potential, sys.sim_load, spec,
                                             sys.forecasts.get(), sys.site, opt);
    check_invariants(run, sys.site);
    const auto kpi = analysis::compute_kpis(run, sys.site);

    const fs::path dir = cfg.output_dir / files.id;
    fs::create_directories(dir);
    simulator::write_trajectory_csv(dir / "trajectory.csv", run);
    if (spec.kind == simulator::StrategySpec::Kind::Forecast)
      simulator::write_setpoint_log_csv(dir / "setpoints.csv", run);
    const nlohmann::json doc = {
        {"system_id", files.id},
        {"strategy", spec.kind == simulator::StrategySpec::Kind::Greedy ? "greedy" : "forecast"},
        {"soc_low_limit_pct", cfg.soc_low_limit_pct},
        {"config_hash", config::config_hash(cfg)},
        {"seed", cfg.seed},
        {"kpi", kpi_json(kpi)}};
    open_out(dir / "kpi.json") << doc.dump(2) << '\n';
    std::cout << files.id << ": avg SOC " << kpi.avg_soc_pct << " %, full "
              << kpi.full_charge_hours_per_day << " h/day, outages " << kpi.outage_hours << " h\n";
  }
  return 0;
}

// --------------------------------------------------------------------- sweep

int cmd_sweep(const Overrides& o) {
  const auto cfg = resolve(o);
  config::validate_inputs(cfg);
  std::vector<config::PreparedSystem> prepared;
  std::vector<analysis::SystemInputs> inputs;
  for (const auto& f : cfg.systems) prepared.push_back(config::prepare_system(f, cfg));
  for (const auto& p : prepared) inputs.push_back(p.inputs());

  const auto t0 = std::chrono::steady_clock::now();
  const auto limits = analysis::sweep_limits(cfg.sweep.count, cfg.sweep.lo, cfg.sweep.hi);
  const auto result = analysis::sweep_soc_low_limit(inputs, limits);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(cfg.output_dir);
  const analysis::ReportMeta meta{config::config_hash(cfg), cfg.seed};
  analysis::emit_report(result, analysis::ReportFormat::Csv, cfg.output_dir / "sweep.csv", meta);
  analysis::emit_report(result, analysis::ReportFormat::Json, cfg.output_dir / "report.json", meta);
  const fs::path plots = cfg.output_dir / "plots";
  analysis::emit_plot_data(result, plots);

  // SOC distributions by hour of day for the greedy run and the configured limit.
  const int offset = cfg.load.clustering.day_offset_h;
  for (const auto& sys : inputs) {
    simulator::ScenarioOptions opt{sys.initial_soc_pct, false, cfg.dead_band_pct_per_h};
    const auto greedy = simulator::run_scenario(sys.pv_potential, sys.load,
                                                simulator::StrategySpec::greedy(), nullptr, sys.site, opt);
    const auto fc = simulator::run_scenario(
        sys.pv_potential, sys.load,
        simulator::StrategySpec::forecast(strategy::StrategyParams::for_site(sys.site, cfg.soc_low_limit_pct)),
        sys.forecasts, sys.site, opt);
    analysis::write_fan_chart_csv(plots / ("fan_soc_" + sys.id + "_greedy.csv"),
                                  analysis::fan_chart(greedy.soc, offset));
    analysis::write_fan_chart_csv(plots / ("fan_soc_" + sys.id + "_forecast.csv"),
                                  analysis::fan_chart(fc.soc, offset));
    analysis::write_fan_chart_csv(plots / ("fan_load_" + sys.id + ".csv"),
                                  analysis::fan_chart(sys.load, offset));
  }
  std::cout << "sweep: " << result.rows.size() << " rows in " << secs << " s -> "
            << (cfg.output_dir / "sweep.csv").string() << '\n';
  return 0;
}

// --------------------------------------------------------------------- synth

int cmd_synth(const Overrides& o) {
  const auto cfg = resolve(o);
  fs::create_directories(cfg.output_dir);
  nlohmann::json generated = nlohmann::json::parse(cfg.canonical);
  generated["seed"] = cfg.seed;
  generated["systems"] = nlohmann::json::array();
  generated.erase("output_dir");
  for (int i = 0; i < cfg.synth.systems; ++i) {
    synth::SynthOptions opt;
    opt.profile = cfg.synth.profile;
    opt.seed = cfg.seed + static_cast<std::uint64_t>(i);
    opt.days = cfg.synth.days;
    opt.start = cfg.synth.start;
    opt.site = cfg.site;
    opt.annual_load_kwh = cfg.synth.annual_load_kwh;
    const std::string id = "sys" + std::to_string(i + 1);
    synth::write_system(synth::generate(opt), cfg.output_dir / id);
    generated["systems"].push_back(
        {{"id", id}, {"telemetry", id + "/telemetry.csv"}, {"irradiance", id + "/irradiance.csv"}});
  }
  generated["output_dir"] = "results";
  open_out(cfg.output_dir / "config.json") << generated.dump(2) << '\n';
  std::cout << "synth: " << cfg.synth.systems << " " << synth::to_string(cfg.synth.profile)
            << " system(s) in " << cfg.output_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forecast-based charging strategy toolkit for standalone PV-battery systems"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->required();
    sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_option("--out", o.out, "output directory");
  };
  auto* forecast = app.add_subcommand("forecast", "24 h load and PV forecasts for one day");
  add_common(forecast);
  forecast->add_option("--date", o.date, "local day, YYYY-MM-DD")->required();
  auto* simulate = app.add_subcommand("simulate", "replay the span under one strategy");
  add_common(simulate);
  simulate->add_option("--limit", o.limit, "SOC_low_limit in percent");
  simulate->add_option("--strategy", o.strategy, "greedy or forecast");
  auto* sweep = app.add_subcommand("sweep", "SOC_low_limit sweep with report and plot data");
  add_common(sweep);
  sweep->add_option("--limit", o.limit, "limit used for the fan charts");
  auto* synth = app.add_subcommand("synth", "generate synthetic telemetry and irradiance");
  add_common(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  spdlog::set_level(spdlog::level::warn);
  try {
    if (*forecast) return cmd_forecast(o);
    if (*simulate) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o);
    if (*synth) return cmd_synth(o);
  } catch (const Error& e) {
    std::cerr << "simctl: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "simctl: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
