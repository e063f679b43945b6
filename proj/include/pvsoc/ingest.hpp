#pragma once

// Telemetry and irradiance CSV ingestion.
//
// telemetry: timestamp,pv_energy_wh,cons_energy_wh,soc_pct
// irradiance: timestamp,ghi_wh_m2,source       (source: forecast | analysis)
//
// Timestamps are UTC, `YYYY-MM-DDTHH:00:00Z`. Each row describes the hour
// starting at its timestamp; SOC is the value at the end of that hour.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pvsoc/core_model.hpp"

namespace pvsoc::ingest {

struct TelemetryRecord {
  UtcHour timestamp{};
  double pv_energy_wh = 0.0;
  double cons_energy_wh = 0.0;
  double soc_pct = 0.0;

  bool operator==(const TelemetryRecord&) const = default;
};

enum class IrradianceSource { ForecastDayAhead, HistoricalAnalysis };

struct IrradianceRecord {
  UtcHour timestamp{};
  double ghi_wh_per_m2 = 0.0;
  IrradianceSource source = IrradianceSource::HistoricalAnalysis;

  bool operator==(const IrradianceRecord&) const = default;
};

/// Returned sorted by timestamp. Throws MalformedRowError, or Error with
/// DuplicateTimestamp / EmptyFile / Io.
std::vector<TelemetryRecord> parse_telemetry_csv(const std::filesystem::path& path);
std::vector<TelemetryRecord> parse_telemetry_csv(std::istream& in);

/// Sorted by (timestamp, source). A timestamp may appear once per source.
std::vector<IrradianceRecord> parse_irradiance_csv(const std::filesystem::path& path);
std::vector<IrradianceRecord> parse_irradiance_csv(std::istream& in);

void write_telemetry_csv(std::ostream& out, const std::vector<TelemetryRecord>& records);
void write_telemetry_csv(const std::filesystem::path& path,
                         const std::vector<TelemetryRecord>& records);
void write_irradiance_csv(std::ostream& out, const std::vector<IrradianceRecord>& records);
void write_irradiance_csv(const std::filesystem::path& path,
                          const std::vector<IrradianceRecord>& records);

struct GapPolicy {
  /// Longest run of missing hours that is filled instead of rejected.
  int max_gap_h = 6;
};

/// Per-channel hourly series. All three share start and length.
struct TelemetrySeries {
  HourlyTimeSeries pv;
  HourlyTimeSeries cons;
  HourlyTimeSeries soc;
};

/// Builds the contiguous grid [first, last] (length = last - first + 1 hours).
/// Missing energy hours become 0 Wh (logged), missing SOC hours carry the last
/// observation forward. A gap longer than policy.max_gap_h throws GapTooLong.
TelemetrySeries to_hourly(const std::vector<TelemetryRecord>& records, GapPolicy policy = {});

/// Irradiance of one source on a contiguous grid; missing hours are zero-filled
/// under the same gap rule.
HourlyTimeSeries to_hourly(const std::vector<IrradianceRecord>& records, IrradianceSource source,
                           GapPolicy policy = {});

struct IrradianceSplit {
  std::vector<IrradianceRecord> forecast;
  std::vector<IrradianceRecord> analysis;
};
IrradianceSplit split_by_source(const std::vector<IrradianceRecord>& records);

const char* to_string(IrradianceSource source);

}  // namespace pvsoc::ingest
