#pragma once

// Hourly energy-balance simulation of a DC-coupled standalone PV battery
// system: PV -> MPPT -> DC bus, battery on the bus, one inverter to the AC
// load. Losses are the static efficiencies of the site's EfficiencyChain.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "pvsoc/core_model.hpp"
#include "pvsoc/energy_forecast.hpp"
#include "pvsoc/forecast_load.hpp"
#include "pvsoc/forecast_pv.hpp"
#include "pvsoc/strategy.hpp"

namespace pvsoc::simulator {

struct SimState {
  UtcHour t{};
  double soc_pct = 100.0;
  bool latched_charge = false;
  UtcHour latch_until{};
  double served_wh = 0.0;
  double curtailed_wh = 0.0;
  double unserved_wh = 0.0;
  int outage_hours = 0;
};

struct StepInput {
  double pv_potential_wh = 0.0;  // DC, before MPPT and curtailment
  double load_wh = 0.0;          // AC demand
};

struct StepResult {
  double pv_direct_wh = 0.0;       // PV drawn for the direct path (before MPPT)
  double served_direct_wh = 0.0;   // AC
  double charge_input_wh = 0.0;    // PV drawn for charging (before MPPT)
  double batt_charge_wh = 0.0;     // at the battery terminals
  double batt_discharge_wh = 0.0;  // at the battery terminals
  double served_battery_wh = 0.0;  // AC
  double curtailed_wh = 0.0;       // PV left unused (before MPPT)
  double unserved_wh = 0.0;        // AC
  double soc_start_pct = 0.0;
  double soc_end_pct = 0.0;
  bool outage = false;

  double pv_used_wh() const { return pv_direct_wh + charge_input_wh; }
  double served_wh() const { return served_direct_wh + served_battery_wh; }
};

/// One hour. Order: PV serves the load directly; the battery covers the
/// deficit down to the hard floor; what is left is unserved; surplus charges
/// the battery up to cmd.soc_cap_pct; the rest is curtailed.
StepResult step(const SimState& state, const StepInput& input, const strategy::ChargeCommand& cmd,
                const SiteConfig& site);

/// Applies a step to the state's SOC, clock and counters.
void advance(SimState& state, const StepResult& r);

/// Largest absolute energy-balance residual of a step, relative to the
/// larger of PV potential and load (absolute when both are below 1 Wh).
double balance_residual(const StepInput& in, const StepResult& r, const SiteConfig& site);

// ------------------------------------------------------------------ forecasts

/// Source of 24 h forecasts at each processing hour.
class ForecastProvider {
 public:
  virtual ~ForecastProvider() = default;
  virtual ForecastPair horizon(UtcHour t_p, std::size_t hours = 24) const = 0;
};

/// Zero-width forecasts equal to the truth. Beyond the end of the data the
/// value 24 h earlier is repeated.
ForecastPair oracle_forecasts(const HourlyTimeSeries& pv_truth, const HourlyTimeSeries& load_truth,
                              UtcHour t_p, std::size_t hours = 24);

class OracleForecasts : public ForecastProvider {
 public:
  OracleForecasts(HourlyTimeSeries pv_truth, HourlyTimeSeries load_truth)
      : pv_(std::move(pv_truth)), load_(std::move(load_truth)) {}
  ForecastPair horizon(UtcHour t_p, std::size_t hours = 24) const override {
    return oracle_forecasts(pv_, load_, t_p, hours);
  }

 private:
  HourlyTimeSeries pv_;
  HourlyTimeSeries load_;
};

/// Forecasts from fitted models. For each local day D the load forecast uses
/// data before D; the horizon from t_p (inside D) is day D from there on,
/// followed by day D + 1 forecast with the same cutoff. PV comes from the
/// day-ahead GHI forecast through the regression.
class FittedForecasts : public ForecastProvider {
 public:
  FittedForecasts(forecast_load::LoadForecaster load_model, forecast_pv::RegressionModel pv_model,
                  HourlyTimeSeries load_history, HourlyTimeSeries ghi_forecast, double pv_z = 1.96);

  ForecastPair horizon(UtcHour t_p, std::size_t hours = 24) const override;

  const forecast_load::LoadForecaster& load_model() const { return load_model_; }
  const forecast_pv::RegressionModel& pv_model() const { return pv_model_; }

 private:
  struct DayEntry {
    LoadForecast same_day;  // day D, cutoff D
    LoadForecast next_day;  // day D + 1, cutoff D
  };
  const DayEntry& entry(UtcDay local_day) const;
  PvForecast pv_hours(UtcHour from, std::size_t hours) const;

  forecast_load::LoadForecaster load_model_;
  forecast_pv::RegressionModel pv_model_;
  HourlyTimeSeries load_history_;
  HourlyTimeSeries ghi_forecast_;
  std::vector<EnergyTriplet> pv_triplets_;  // one per GHI forecast hour
  double pv_z_;
  int day_offset_h_;
  std::vector<DayEntry> days_;  // local days of the load history
  UtcDay cache_first_{};
};

// ------------------------------------------------------------------ scenario

struct StrategySpec {
  enum class Kind { Greedy, Forecast };
  Kind kind = Kind::Greedy;
  strategy::StrategyParams params;

  static StrategySpec greedy() { return {}; }
  static StrategySpec forecast(strategy::StrategyParams p) { return {Kind::Forecast, p}; }
};

struct SetpointLogRow {
  UtcHour t_p{};
  double soc_now_pct = 0.0;
  double soc_low_goal_pct = 0.0;
  double soc_up_limit_pct = 0.0;
  UtcHour t_start_charge{};
  UtcHour t_sd{};
  UtcHour t_ed{};
  strategy::ChargeMode mode = strategy::ChargeMode::ChargeFromSurplus;
};

struct ScenarioOptions {
  /// Default: 100 %.
  std::optional<double> initial_soc_pct;
  bool record_setpoints = true;
  double eps_pct_per_h = strategy::kDefaultDeadBandPctPerHour;
};

struct ScenarioResult {
  HourlyTimeSeries soc;  // end-of-hour SOC
  std::vector<StepInput> inputs;
  std::vector<StepResult> steps;
  std::vector<SetpointLogRow> setpoints;
  SimState final_state;
};

/// Replays the aligned series hour by hour. Forecast strategies need a
/// provider; throws SeriesMisaligned when the series do not line up.
ScenarioResult run_scenario(const HourlyTimeSeries& pv_potential, const HourlyTimeSeries& load,
                            const StrategySpec& strategy, const ForecastProvider* forecasts,
                            const SiteConfig& site, const ScenarioOptions& options = {});

using forecast_pv::reconstruct_potential_pv;

void write_trajectory_csv(std::ostream& out, const ScenarioResult& r);
void write_trajectory_csv(const std::filesystem::path& path, const ScenarioResult& r);
void write_setpoint_log_csv(std::ostream& out, const ScenarioResult& r);
void write_setpoint_log_csv(const std::filesystem::path& path, const ScenarioResult& r);

}  // namespace pvsoc::simulator
