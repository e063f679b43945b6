#pragma once

// Operational indicators, the SOC_low_limit sweep and report emission.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pvsoc/simulator.hpp"

namespace pvsoc::analysis {

inline constexpr double kFullChargeThresholdPct = 99.5;

struct KpiReport {
  double pv_generation_wh = 0.0;  // PV drawn from the array (direct + charging)
  double consumption_wh = 0.0;    // load actually served
  double avg_system_efficiency = 0.0;
  double soc_ci_lo = 0.0;  // 12.5th percentile
  double soc_ci_hi = 0.0;  // 87.5th percentile
  double direct_consumption_rate = 0.0;
  double capacity_factor = 0.0;
  double outage_hours = 0.0;
  double avg_soc_pct = 0.0;
  double full_charge_hours_per_day = 0.0;
  // shares of the demanded load; they add up to 1
  double load_share_direct = 0.0;
  double load_share_battery = 0.0;
  double load_share_unserved = 0.0;

  bool operator==(const KpiReport&) const = default;
};

/// Linear interpolation between order statistics (position p * (n - 1)).
double percentile_sorted(std::span<const double> sorted, double p);
double percentile(std::vector<double> values, double p);

/// Throws EmptySpan for an empty run.
KpiReport compute_kpis(const simulator::ScenarioResult& run, const SiteConfig& site,
                       double full_threshold_pct = kFullChargeThresholdPct);

/// `count` values evenly spaced on [lo, hi], both ends included.
std::vector<double> sweep_limits(int count = 40, double lo = 20.0, double hi = 100.0);

/// Everything one simulated system needs. `forecasts` must outlive the sweep.
struct SystemInputs {
  std::string id;
  SiteConfig site;
  HourlyTimeSeries pv_potential;
  HourlyTimeSeries load;
  const simulator::ForecastProvider* forecasts = nullptr;
  std::optional<double> initial_soc_pct;
  double eps_pct_per_h = strategy::kDefaultDeadBandPctPerHour;
};

struct SweepRow {
  double soc_low_limit_pct = 0.0;
  std::string system_id;
  KpiReport kpi;
  bool operator==(const SweepRow&) const = default;
};

struct BaselineRow {
  std::string system_id;
  KpiReport kpi;
  bool operator==(const BaselineRow&) const = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ascending limit, systems in input order
  std::vector<BaselineRow> baseline;
  bool operator==(const SweepResult&) const = default;

  /// Rows of one system, ascending limit.
  std::vector<SweepRow> for_system(const std::string& id) const;
};

KpiReport run_kpis(const SystemInputs& sys, const simulator::StrategySpec& spec);

/// One forecast-based run per (limit, system) plus a greedy baseline per
/// system. Rows come out in ascending limit order.
SweepResult sweep_soc_low_limit(const std::vector<SystemInputs>& systems,
                                const std::vector<double>& limits = sweep_limits());

struct ReportMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
};

enum class ReportFormat { Json, Csv };

/// CSV columns:
/// soc_low_limit_pct,system_id,avg_soc_pct,full_charge_h_per_day,outage_h,pv_gen_wh,
/// consumption_wh,efficiency,dcr,capacity_factor,soc_ci_lo,soc_ci_hi
inline constexpr const char* kSweepCsvHeader =
    "soc_low_limit_pct,system_id,avg_soc_pct,full_charge_h_per_day,outage_h,pv_gen_wh,"
    "consumption_wh,efficiency,dcr,capacity_factor,soc_ci_lo,soc_ci_hi";

/// Throws EmptySpan for a sweep without rows.
void emit_report(const SweepResult& result, ReportFormat format, std::ostream& out,
                 const ReportMeta& meta = {});
void emit_report(const SweepResult& result, ReportFormat format,
                 const std::filesystem::path& path, const ReportMeta& meta = {});

/// Reads back what emit_report wrote. CSV carries only the sweep rows and
/// their columns; JSON carries everything including the baseline.
SweepResult parse_sweep_csv(std::istream& in);
SweepResult parse_report_json(std::istream& in, ReportMeta* meta = nullptr);

struct FanChartRow {
  int hour = 0;
  double p5 = 0, p25 = 0, p50 = 0, p75 = 0, p95 = 0;
};

/// Distribution of all samples per local hour of day.
std::vector<FanChartRow> fan_chart(const HourlyTimeSeries& series, int day_offset_h = 0);
void write_fan_chart_csv(const std::filesystem::path& path, const std::vector<FanChartRow>& rows);

/// Writes outages_by_limit.csv, avg_soc_by_limit.csv, full_charge_by_limit.csv
/// (limit,system_id,value) and baseline.csv into `dir`.
std::vector<std::filesystem::path> emit_plot_data(const SweepResult& result,
                                                  const std::filesystem::path& dir);

}  // namespace pvsoc::analysis
