#pragma once

// Day-ahead PV forecast: horizontal irradiation is projected onto the panel
// plane and mapped to energy with a linear least-squares model.

#include <span>
#include <vector>

#include <json.hpp>

#include "pvsoc/core_model.hpp"
#include "pvsoc/energy_forecast.hpp"

namespace pvsoc::forecast_pv {

struct SunPosition {
  double zenith_deg = 90.0;
  double azimuth_deg = 0.0;  // clockwise from north
};

/// Spencer declination and equation of time (about +-0.5 deg zenith).
SunPosition sun_position(const SiteConfig& site, std::chrono::sys_seconds time);

/// Sun at the midpoint of the hour starting at `hour_start`.
SunPosition sun_position_mid_hour(const SiteConfig& site, UtcHour hour_start);

/// Solar-constant extraterrestrial normal irradiance (W/m2) with the
/// day-of-year eccentricity correction.
double extraterrestrial_normal(int day_of_year);

/// Diffuse fraction from the clearness index (Erbs et al.).
double erbs_diffuse_fraction(double clearness_index);

/// Plane-of-array irradiation (Wh/m2 over the hour) from GHI via Erbs
/// decomposition and isotropic-sky transposition. A horizontal panel
/// returns the GHI unchanged; otherwise 0 when the sun is below the horizon.
double project_to_poa(double ghi_wh_m2, const SunPosition& sun, const SiteConfig& site,
                      int day_of_year, double albedo = 0.2);

/// Convenience overload evaluating the sun at the middle of `hour_start`.
double project_to_poa(double ghi_wh_m2, UtcHour hour_start, const SiteConfig& site,
                      double albedo = 0.2);

struct RegressionModel {
  double slope = 0.0;         // Wh per (Wh/m2) of plane-of-array irradiation
  double intercept = 0.0;     // Wh
  double residual_std = 0.0;  // Wh
  std::size_t n_train = 0;
  double slope_std_error = 0.0;
  SiteConfig site;            // geometry snapshot

  bool fitted() const { return n_train >= 2; }
  nlohmann::json to_json() const;
  static RegressionModel from_json(const nlohmann::json& j);
};

/// OLS on pairs with poa > 0 whose mask entry is false. Needs at least
/// `min_pairs`; throws InsufficientData or DegenerateInput (constant POA).
RegressionModel fit_power_regression(std::span<const double> poa, std::span<const double> pv,
                                     const std::vector<bool>& curtailment_mask,
                                     std::size_t min_pairs = 48);

/// Mask rule: an hour counts as possibly curtailed when its end-of-hour SOC is
/// at or above `full_soc_pct`.
std::vector<bool> curtailment_mask_from_soc(std::span<const double> soc_pct,
                                            double full_soc_pct = 100.0);

/// Forecast for consecutive hours starting at `start`; one GHI value per hour.
/// Hours with the sun below the horizon or zero POA are (0, 0, 0).
PvForecast forecast_pv(const RegressionModel& model, UtcHour start,
                       std::span<const double> ghi_forecast_wh_m2, double z = 1.96);

/// 24-hour variant; throws InvalidArgument unless exactly 24 values.
PvForecast forecast_pv_24h(const RegressionModel& model, UtcHour start,
                           std::span<const double> ghi_forecast_wh_m2, double z = 1.96);

/// Potential (pre-curtailment) PV energy per hour from historical GHI.
HourlyTimeSeries reconstruct_potential_pv(const HourlyTimeSeries& ghi,
                                          const RegressionModel& model);

/// POA series for a GHI series, hour by hour.
HourlyTimeSeries poa_series(const HourlyTimeSeries& ghi, const SiteConfig& site);

}  // namespace pvsoc::forecast_pv
