#pragma once

// Synthetic PV-battery systems standing in for real fleet telemetry.
//
// Irradiance is a Haurwitz clear sky scaled by a day-to-day cloud process;
// the day-ahead forecast is the analysis value with multiplicative noise.
// Telemetry comes from replaying the greedy strategy, so PV in telemetry is
// what the plant delivered (curtailed when the battery was full).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvsoc/core_model.hpp"
#include "pvsoc/ingest.hpp"

namespace pvsoc::synth {

enum class Profile { MarketLike, SinglePeak, HighLoad };

const char* to_string(Profile p);
/// Throws Config for an unknown name.
Profile parse_profile(std::string_view name);

struct SynthOptions {
  Profile profile = Profile::MarketLike;
  std::uint64_t seed = 1;
  int days = 365;
  UtcDay start = std::chrono::sys_days{std::chrono::year{2019} / 1 / 1};
  SiteConfig site;
  /// Served-load target per year; 0 picks the profile default.
  double annual_load_kwh = 0.0;
  /// Plant Wh per Wh/m2 of plane-of-array irradiation.
  double plant_slope = 8.0;
  /// Relative std of the day-ahead GHI forecast error. Ignored by single_peak.
  double forecast_noise = 0.15;
  /// Relative std of the hourly load noise. Ignored by single_peak.
  double load_noise = 0.15;
};

struct SynthSystem {
  std::vector<ingest::TelemetryRecord> telemetry;
  std::vector<ingest::IrradianceRecord> irradiance;  // forecast and analysis rows
  HourlyTimeSeries load;          // true AC demand
  HourlyTimeSeries pv_potential;  // true DC potential
  HourlyTimeSeries ghi_analysis;
  HourlyTimeSeries ghi_forecast;
};

/// Clear-sky GHI (Haurwitz) in W/m2 for a cosine of the zenith angle.
double haurwitz_ghi(double cos_zenith);

/// Demand profile in Wh for one hour; deterministic part only.
double profile_load_wh(Profile p, int local_hour, int weekday, double daily_kwh);

/// Deterministic in (options, seed).
SynthSystem generate(const SynthOptions& options);

/// Writes telemetry.csv and irradiance.csv into `dir` and returns their paths.
std::pair<std::filesystem::path, std::filesystem::path> write_system(
    const SynthSystem& sys, const std::filesystem::path& dir);

}  // namespace pvsoc::synth
