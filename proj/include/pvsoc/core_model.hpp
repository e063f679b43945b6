#pragma once

// Shared domain types for the PV-battery toolkit.
//
// Units used throughout: energy in Wh, power in W, SOC in percent (0..100),
// time in whole UTC hours. SOC is treated as state of energy, so it is linear
// in stored energy.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvsoc/error.hpp"

namespace pvsoc {

using UtcHour = std::chrono::sys_time<std::chrono::hours>;
using UtcDay = std::chrono::sys_days;

/// Formats as `YYYY-MM-DDTHH:00:00Z`.
std::string format_utc(UtcHour t);
/// Parses `YYYY-MM-DDTHH:MM:SSZ`; minutes and seconds must be zero.
std::optional<UtcHour> parse_utc(std::string_view text);
std::optional<UtcDay> parse_date(std::string_view text);
std::string format_date(UtcDay d);

inline UtcDay day_of(UtcHour t) { return std::chrono::floor<std::chrono::days>(t); }
inline int hour_of_day(UtcHour t) {
  return static_cast<int>((t - day_of(t)).count());
}
/// 0 = Monday .. 6 = Sunday.
int weekday_index(UtcDay d);

enum class SeriesKind { EnergyWh, SocPct };

/// Contiguous hourly samples starting at `start`.
struct HourlyTimeSeries {
  UtcHour start{};
  std::vector<double> values;
  SeriesKind kind = SeriesKind::EnergyWh;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  UtcHour time_at(std::size_t i) const { return start + std::chrono::hours(i); }
  UtcHour end() const { return time_at(values.size()); }
  /// Index of `t`, or nullopt when outside the series.
  std::optional<std::size_t> index_of(UtcHour t) const;
  double operator[](std::size_t i) const { return values[i]; }

  /// Throws InvalidArgument when a sample breaks the kind's range.
  void validate() const;
};

struct BatterySpec {
  double capacity_wh = 10000.0;
  double soc_hard_min_pct = 20.0;
  double roundtrip_eff = 0.90;
  std::optional<double> max_charge_w;
  std::optional<double> max_discharge_w;

  void validate() const;
};

struct EfficiencyChain {
  double mppt_eff = 0.98;
  double inverter_eff = 0.943;
  double batt_charge_eff = std::sqrt(0.90);
  double batt_discharge_eff = std::sqrt(0.90);

  /// Symmetric split of a round-trip efficiency.
  static EfficiencyChain with_roundtrip(double roundtrip_eff);
  void validate(const BatterySpec& batt) const;

  double direct_path() const { return mppt_eff * inverter_eff; }
  double pv_to_battery() const { return mppt_eff * batt_charge_eff; }
  double battery_to_load() const { return batt_discharge_eff * inverter_eff; }
};

struct SiteConfig {
  double latitude_deg = 6.45;
  double longitude_deg = 3.40;
  double panel_tilt_deg = 10.0;
  double panel_azimuth_deg = 180.0;  // clockwise from north
  double pv_peak_w = 9750.0;
  BatterySpec battery;
  EfficiencyChain eff;
  double timezone_offset_h = 1.0;

  void validate() const;
};

/// Energy over an interval in the (low, exp, up) convention of a 95%
/// prediction interval.
struct EnergyTriplet {
  double low = 0.0;
  double exp = 0.0;
  double up = 0.0;
};

struct SocDeltaTriplet {
  double low = 0.0;
  double exp = 0.0;
  double up = 0.0;
};

/// SOC after moving `net_batt_energy_wh` through the battery terminals
/// (positive = charge). Clamped to [0, 100].
double soc_after(double soc_pct, double net_batt_energy_wh, const BatterySpec& batt);

/// Expected SOC change in percent: 100 * (pv * eta - cons) / e_batt.
double delta_soc(double e_pv_wh, double e_cons_wh, double eta_charge, double e_batt_wh);

/// Pairs pessimistic PV with optimistic consumption and vice versa, so the
/// result is ordered whenever both inputs are.
SocDeltaTriplet delta_soc_triplet(const EnergyTriplet& pv, const EnergyTriplet& cons,
                                  double eta_charge, double e_batt_wh);

}  // namespace pvsoc
