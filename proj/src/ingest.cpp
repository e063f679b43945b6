#include "pvsoc/ingest.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pvsoc::ingest {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                    : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end && std::isfinite(out);
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream create_or_throw(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

// Reads the header, returns false on an empty stream.
bool expect_header(std::istream& in, std::string_view expected) {
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t != expected)
      throw MalformedRowError(1, "unexpected header '" + std::string(t) + "', expected '" +
                                     std::string(expected) + "'");
    return true;
  }
  return false;
}

std::string fmt_num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

const char* to_string(IrradianceSource source) {
  return source == IrradianceSource::ForecastDayAhead ? "forecast" : "analysis";
}

std::vector<TelemetryRecord> parse_telemetry_csv(std::istream& in) {
  if (!expect_header(in, "timestamp,pv_energy_wh,cons_energy_wh,soc_pct"))
    throw Error(ErrorCode::EmptyFile, "telemetry file is empty");

  std::vector<TelemetryRecord> records;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto f = split_fields(t);
    if (f.size() != 4) throw MalformedRowError(line_no, "expected 4 fields");
    TelemetryRecord r;
    const auto ts = parse_utc(trim(f[0]));
    if (!ts) throw MalformedRowError(line_no, "bad timestamp '" + std::string(f[0]) + "'");
    r.timestamp = *ts;
    if (!parse_double(f[1], r.pv_energy_wh) || r.pv_energy_wh < 0.0)
      throw MalformedRowError(line_no, "pv_energy_wh must be a number >= 0");
    if (!parse_double(f[2], r.cons_energy_wh) || r.cons_energy_wh < 0.0)
      throw MalformedRowError(line_no, "cons_energy_wh must be a number >= 0");
    if (!parse_double(f[3], r.soc_pct) || r.soc_pct < 0.0 || r.soc_pct > 100.0)
      throw MalformedRowError(line_no, "soc_pct must be a number in [0, 100]");
    records.push_back(r);
  }
  if (records.empty()) throw Error(ErrorCode::EmptyFile, "telemetry file has no data rows");

  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].timestamp == records[i - 1].timestamp)
      throw Error(ErrorCode::DuplicateTimestamp,
                  "duplicate timestamp " + format_utc(records[i].timestamp));
  return records;
}

std::vector<TelemetryRecord> parse_telemetry_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_telemetry_csv(in);
}

std::vector<IrradianceRecord> parse_irradiance_csv(std::istream& in) {
  if (!expect_header(in, "timestamp,ghi_wh_m2,source"))
    throw Error(ErrorCode::EmptyFile, "irradiance file is empty");

  std::vector<IrradianceRecord> records;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto f = split_fields(t);
    if (f.size() != 3) throw MalformedRowError(line_no, "expected 3 fields");
    IrradianceRecord r;
    const auto ts = parse_utc(trim(f[0]));
    if (!ts) throw MalformedRowError(line_no, "bad timestamp '" + std::string(f[0]) + "'");
    r.timestamp = *ts;
    if (!parse_double(f[1], r.ghi_wh_per_m2) || r.ghi_wh_per_m2 < 0.0)
      throw MalformedRowError(line_no, "ghi_wh_m2 must be a number >= 0");
    const auto src = trim(f[2]);
    if (src == "forecast")
      r.source = IrradianceSource::ForecastDayAhead;
    else if (src == "analysis")
      r.source = IrradianceSource::HistoricalAnalysis;
    else
      throw MalformedRowError(line_no, "source must be 'forecast' or 'analysis'");
    records.push_back(r);
  }
  if (records.empty()) throw Error(ErrorCode::EmptyFile, "irradiance file has no data rows");

  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.source < b.source;
  });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].timestamp == records[i - 1].timestamp &&
        records[i].source == records[i - 1].source)
      throw Error(ErrorCode::DuplicateTimestamp,
                  "duplicate timestamp " + format_utc(records[i].timestamp) + " for source " +
                      to_string(records[i].source));
  return records;
}

std::vector<IrradianceRecord> parse_irradiance_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_irradiance_csv(in);
}

void write_telemetry_csv(std::ostream& out, const std::vector<TelemetryRecord>& records) {
  out << "timestamp,pv_energy_wh,cons_energy_wh,soc_pct\n";
  for (const auto& r : records)
    out << format_utc(r.timestamp) << ',' << fmt_num(r.pv_energy_wh) << ','
        << fmt_num(r.cons_energy_wh) << ',' << fmt_num(r.soc_pct) << '\n';
}

void write_telemetry_csv(const std::filesystem::path& path,
                         const std::vector<TelemetryRecord>& records) {
  auto out = create_or_throw(path);
  write_telemetry_csv(out, records);
}

void write_irradiance_csv(std::ostream& out, const std::vector<IrradianceRecord>& records) {
  out << "timestamp,ghi_wh_m2,source\n";
  for (const auto& r : records)
    out << format_utc(r.timestamp) << ',' << fmt_num(r.ghi_wh_per_m2) << ','
        << to_string(r.source) << '\n';
}

void write_irradiance_csv(const std::filesystem::path& path,
                          const std::vector<IrradianceRecord>& records) {
  auto out = create_or_throw(path);
  write_irradiance_csv(out, records);
}

TelemetrySeries to_hourly(const std::vector<TelemetryRecord>& records, GapPolicy policy) {
  if (records.size() < 2)
    throw Error(ErrorCode::InsufficientData, "to_hourly needs at least 2 records");
  const UtcHour first = records.front().timestamp;
  const UtcHour last = records.back().timestamp;
  const auto n = static_cast<std::size_t>((last - first).count()) + 1;

  TelemetrySeries s;
  s.pv = {first, std::vector<double>(n, 0.0), SeriesKind::EnergyWh};
  s.cons = {first, std::vector<double>(n, 0.0), SeriesKind::EnergyWh};
  s.soc = {first, std::vector<double>(n, 0.0), SeriesKind::SocPct};

  std::size_t filled = 0;
  std::size_t prev = 0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    const auto i = static_cast<std::size_t>((r.timestamp - first).count());
    if (k > 0) {
      if (i <= prev)
        throw Error(ErrorCode::DuplicateTimestamp,
                    "records not strictly increasing at " + format_utc(r.timestamp));
      const std::size_t missing = i - prev - 1;
      if (missing > static_cast<std::size_t>(policy.max_gap_h))
        throw Error(ErrorCode::GapTooLong, std::to_string(missing) + " h gap after " +
                                               format_utc(records[k - 1].timestamp));
      for (std::size_t g = prev + 1; g < i; ++g) s.soc.values[g] = s.soc.values[prev];
      filled += missing;
    }
    s.pv.values[i] = r.pv_energy_wh;
    s.cons.values[i] = r.cons_energy_wh;
    s.soc.values[i] = r.soc_pct;
    prev = i;
  }
  if (filled > 0)
    spdlog::warn("telemetry: filled {} missing hours (energy = 0 Wh, SOC carried forward)",
                 filled);
  return s;
}

HourlyTimeSeries to_hourly(const std::vector<IrradianceRecord>& records, IrradianceSource source,
                           GapPolicy policy) {
  std::vector<const IrradianceRecord*> sel;
  for (const auto& r : records)
    if (r.source == source) sel.push_back(&r);
  if (sel.size() < 2)
    throw Error(ErrorCode::InsufficientData,
                std::string("need at least 2 '") + to_string(source) + "' irradiance records");
  std::stable_sort(sel.begin(), sel.end(),
                   [](auto* a, auto* b) { return a->timestamp < b->timestamp; });
  const UtcHour first = sel.front()->timestamp;
  const auto n = static_cast<std::size_t>((sel.back()->timestamp - first).count()) + 1;
  HourlyTimeSeries out{first, std::vector<double>(n, 0.0), SeriesKind::EnergyWh};
  std::size_t prev = 0;
  std::size_t filled = 0;
  for (std::size_t k = 0; k < sel.size(); ++k) {
    const auto i = static_cast<std::size_t>((sel[k]->timestamp - first).count());
    if (k > 0) {
      if (i <= prev)
        throw Error(ErrorCode::DuplicateTimestamp,
                    "duplicate irradiance timestamp " + format_utc(sel[k]->timestamp));
      const std::size_t missing = i - prev - 1;
      if (missing > static_cast<std::size_t>(policy.max_gap_h))
        throw Error(ErrorCode::GapTooLong, std::to_string(missing) + " h irradiance gap after " +
                                               format_utc(sel[k - 1]->timestamp));
      filled += missing;
    }
    out.values[i] = sel[k]->ghi_wh_per_m2;
    prev = i;
  }
  if (filled > 0) spdlog::warn("irradiance: zero-filled {} missing hours", filled);
  return out;
}

IrradianceSplit split_by_source(const std::vector<IrradianceRecord>& records) {
  IrradianceSplit s;
  for (const auto& r : records)
    (r.source == IrradianceSource::ForecastDayAhead ? s.forecast : s.analysis).push_back(r);
  return s;
}

}  // namespace pvsoc::ingest
