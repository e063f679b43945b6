#pragma once

// Forecast-based charging strategy.
//
// At every processing hour t_p the planner looks 24 h ahead, finds the
// charge window and the discharge period that follows it, and derives
//   soc_low_goal  = limit + dSOC_exp(discharge) - dSOC_low(discharge)
//   soc_up_limit  = soc_low_goal - dSOC_exp(discharge)
// Charging from surplus is delayed until the pessimistic remaining charge
// would no longer overshoot soc_up_limit:
//   soc_up_limit >= SOC(t_p) + dSOC_low(t_p, t_ec)
// On the hourly grid the start is the hour after which waiting would leave
// too little charge, since charging within that hour stops at the cap.
// Below soc_low_limit the battery takes any surplus (safeguard).

#include <string>
#include <vector>

#include "pvsoc/core_model.hpp"
#include "pvsoc/energy_forecast.hpp"

namespace pvsoc::strategy {

struct StrategyParams {
  double soc_low_limit_pct = 60.0;
  double e_batt_wh = 10000.0;
  double eta_charge = 0.93;

  /// eta_charge = mppt * battery charge efficiency of the site.
  static StrategyParams for_site(const SiteConfig& site, double soc_low_limit_pct);
  void validate() const;
};

/// Hour offsets from t_p, each in [0, horizon]. A period [a, b) covers
/// hours a .. b-1.
struct PeriodBoundaries {
  int t_sc = 0;  // start of charge window
  int t_ec = 0;  // end of charge window
  int t_sd = 0;  // start of next discharge period (= t_ec)
  int t_ed = 0;  // end of next discharge period
  bool has_charge_window() const { return t_ec > t_sc; }
};

struct DaySetpoints {
  double soc_low_goal_pct = 0.0;
  double soc_up_limit_pct = 100.0;
  int t_start_charge = 0;  // offset from t_p
  PeriodBoundaries periods;
  SocDeltaTriplet discharge;      // over [t_sd, t_ed)
  double dsoc_low_to_charge_end = 0.0;  // dSOC_low over [0, t_ec)
};

enum class ChargeMode { ChargeFromSurplus, HoldCurtailAboveCap, SafeguardCharge };
const char* to_string(ChargeMode mode);

struct ChargeCommand {
  ChargeMode mode = ChargeMode::ChargeFromSurplus;
  double soc_cap_pct = 100.0;
  bool operator==(const ChargeCommand&) const = default;
};

inline constexpr double kDefaultDeadBandPctPerHour = 0.1;
inline constexpr int kNightMinHours = 6;

/// Hourly expected SOC rate over the horizon.
std::vector<double> expected_soc_rate(const ForecastPair& f, const StrategyParams& params);

/// Sign runs of the expected SOC rate with a dead band of `eps` %/h. The
/// charge period is the surplus run holding the largest rate among the runs
/// of the first solar day, i.e. before the first stretch of
/// kNightMinHours hours without surplus.
PeriodBoundaries detect_periods(const ForecastPair& f, const StrategyParams& params,
                                double eps_pct_per_h = kDefaultDeadBandPctPerHour);
PeriodBoundaries detect_periods(std::span<const double> soc_rate,
                                double eps_pct_per_h = kDefaultDeadBandPctPerHour);

/// dSOC triplet for hours [first, last).
SocDeltaTriplet interval_delta(const IntervalIndex& pv, const IntervalIndex& load,
                               const StrategyParams& params, int first, int last);

double compute_soc_low_goal(const StrategyParams& params, const SocDeltaTriplet& discharge);

/// Throws InvalidArgument for a positive expected change.
double compute_soc_up_limit(double soc_low_goal_pct, double dsoc_exp_discharge);

bool should_start_charging(double soc_now_pct, double soc_up_limit_pct,
                           double dsoc_low_remaining_charge);

DaySetpoints plan(const ForecastPair& f, const StrategyParams& params, double soc_now_pct,
                  double eps_pct_per_h = kDefaultDeadBandPctPerHour);

/// `hours_since_plan` is t_p minus the processing time the setpoints were
/// computed at; `latched` is the caller's charge latch.
ChargeCommand decide(double soc_now_pct, const DaySetpoints& setpoints,
                     const StrategyParams& params, int hours_since_plan = 0,
                     bool latched = false);

/// Conventional operation: charge from any surplus up to 100 %.
ChargeCommand greedy_decision(double soc_now_pct);

}  // namespace pvsoc::strategy
