#pragma once

// Run configuration (one JSON document) and the file-to-simulation pipeline
// shared by the CLI and the tests.
//
// {
//   "seed": 42,                                  required
//   "site": { "latitude_deg", "longitude_deg", "panel_tilt_deg", "panel_azimuth_deg",
//             "pv_peak_w", "timezone_offset_h",
//             "battery": { "capacity_wh", "soc_hard_min_pct", "roundtrip_eff",
//                          "max_charge_w", "max_discharge_w" },
//             "eff": { "mppt_eff", "inverter_eff" } },
//   "strategy": { "kind": "forecast" | "greedy", "soc_low_limit_pct", "dead_band_pct_per_h" },
//   "forecast": { "z", "pv_z", "k_max", "filter_window_days", "order_grid": [[p, d, q], ...] },
//   "span": { "start": "YYYY-MM-DD", "end": "YYYY-MM-DD" },       inclusive days, optional
//   "systems": [ { "id", "telemetry", "irradiance" } ],          paths relative to the file
//   "sweep": { "count", "lo", "hi" },
//   "synth": { "profile", "days", "systems", "start", "annual_load_kwh" },
//   "output_dir": "out"
// }
//
// Every field except "seed" has a default.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pvsoc/analysis.hpp"
#include "pvsoc/core_model.hpp"
#include "pvsoc/forecast_load.hpp"
#include "pvsoc/forecast_pv.hpp"
#include "pvsoc/simulator.hpp"
#include "pvsoc/synth.hpp"

namespace pvsoc::config {

struct SystemFiles {
  std::string id;
  std::filesystem::path telemetry;
  std::filesystem::path irradiance;
};

struct SweepSettings {
  int count = 40;
  double lo = 20.0;
  double hi = 100.0;
};

struct SynthSettings {
  synth::Profile profile = synth::Profile::MarketLike;
  int days = 365;
  int systems = 1;
  UtcDay start = std::chrono::sys_days{std::chrono::year{2019} / 1 / 1};
  double annual_load_kwh = 0.0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  SiteConfig site;
  simulator::StrategySpec::Kind strategy = simulator::StrategySpec::Kind::Forecast;
  double soc_low_limit_pct = 65.0;
  double dead_band_pct_per_h = strategy::kDefaultDeadBandPctPerHour;
  forecast_load::LoadForecastSettings load;
  double pv_z = 1.96;
  std::optional<UtcDay> span_start;
  std::optional<UtcDay> span_end;  // inclusive
  std::vector<SystemFiles> systems;
  SweepSettings sweep;
  SynthSettings synth;
  std::filesystem::path output_dir = "out";
  /// Canonical JSON of the parsed document, the input of config_hash.
  std::string canonical;
};

/// Throws Config on schema errors. Relative paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Checks that every referenced input file exists (Config otherwise).
void validate_inputs(const RunConfig& cfg);

/// 64-bit FNV-1a of the canonical config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::uint64_t fnv1a64(std::string_view data);

/// A system ready to simulate: inputs on one grid plus fitted forecasters.
struct PreparedSystem {
  std::string id;
  SiteConfig site;
  HourlyTimeSeries pv_telemetry;
  HourlyTimeSeries load;
  HourlyTimeSeries soc_telemetry;
  HourlyTimeSeries ghi_analysis;
  HourlyTimeSeries ghi_forecast;
  forecast_pv::RegressionModel pv_model;           // fitted on analysis GHI
  forecast_pv::RegressionModel pv_forecast_model;  // same line, spread on forecast GHI
  std::shared_ptr<const simulator::FittedForecasts> forecasts;
  // simulation inputs, clipped to the configured span
  HourlyTimeSeries sim_pv_potential;
  HourlyTimeSeries sim_load;
  double initial_soc_pct = 100.0;
  double dead_band_pct_per_h = strategy::kDefaultDeadBandPctPerHour;

  analysis::SystemInputs inputs() const;
};

/// Reads, aligns and fits. The load model is fitted on the whole telemetry
/// span and the PV regression on analysis GHI against delivered PV with
/// full-battery hours masked. Throws with the ingest / forecast error codes.
PreparedSystem prepare_system(const SystemFiles& files, const RunConfig& cfg);

/// Clips an aligned series to the configured span (whole series if unset).
HourlyTimeSeries clip_to_span(const HourlyTimeSeries& s, const RunConfig& cfg);

}  // namespace pvsoc::config
