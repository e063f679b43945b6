#include "pvsoc/core_model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace pvsoc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::GapTooLong: return "GapTooLong";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::UnfittedModel: return "UnfittedModel";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SeriesMisaligned: return "SeriesMisaligned";
    case ErrorCode::EmptySpan: return "EmptySpan";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvariantBreach: return "InvariantBreach";
  }
  return "Unknown";
}

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

}  // namespace

std::optional<UtcDay> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
      !parse_int(s.substr(8, 2), d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return UtcDay{ymd};
}

std::optional<UtcHour> parse_utc(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (s.size() != 20 || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
    return std::nullopt;
  auto day = parse_date(s.substr(0, 10));
  int hh = 0, mm = 0, ss = 0;
  if (!day || !parse_int(s.substr(11, 2), hh) || !parse_int(s.substr(14, 2), mm) ||
      !parse_int(s.substr(17, 2), ss))
    return std::nullopt;
  if (hh < 0 || hh > 23 || mm != 0 || ss != 0) return std::nullopt;
  return UtcHour{*day} + std::chrono::hours(hh);
}

std::string format_date(UtcDay d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_utc(UtcHour t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:00:00Z", format_date(day_of(t)).c_str(),
                hour_of_day(t));
  return buf;
}

int weekday_index(UtcDay d) {
  return static_cast<int>(std::chrono::weekday{d}.iso_encoding()) - 1;
}

std::optional<std::size_t> HourlyTimeSeries::index_of(UtcHour t) const {
  if (t < start) return std::nullopt;
  const auto i = static_cast<std::size_t>((t - start).count());
  if (i >= values.size()) return std::nullopt;
  return i;
}

void HourlyTimeSeries::validate() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const bool ok = kind == SeriesKind::EnergyWh ? (std::isfinite(v) && v >= 0.0)
                                                  : (std::isfinite(v) && v >= 0.0 && v <= 100.0);
    if (!ok)
      throw Error(ErrorCode::InvalidArgument,
                  "series sample out of range at " + format_utc(time_at(i)));
  }
}

void BatterySpec::validate() const {
  if (!(capacity_wh > 0.0)) throw Error(ErrorCode::Config, "battery capacity must be > 0");
  if (!(soc_hard_min_pct >= 0.0 && soc_hard_min_pct < 100.0))
    throw Error(ErrorCode::Config, "soc_hard_min_pct must be in [0, 100)");
  if (!(roundtrip_eff > 0.0 && roundtrip_eff <= 1.0))
    throw Error(ErrorCode::Config, "roundtrip_eff must be in (0, 1]");
  if (max_charge_w && !(*max_charge_w > 0.0))
    throw Error(ErrorCode::Config, "max_charge_w must be > 0");
  if (max_discharge_w && !(*max_discharge_w > 0.0))
    throw Error(ErrorCode::Config, "max_discharge_w must be > 0");
}

EfficiencyChain EfficiencyChain::with_roundtrip(double roundtrip_eff) {
  EfficiencyChain e;
  e.batt_charge_eff = std::sqrt(roundtrip_eff);
  e.batt_discharge_eff = std::sqrt(roundtrip_eff);
  return e;
}

void EfficiencyChain::validate(const BatterySpec& batt) const {
  for (double v : {mppt_eff, inverter_eff, batt_charge_eff, batt_discharge_eff})
    if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorCode::Config, "efficiencies must be in (0, 1]");
  if (std::fabs(batt_charge_eff * batt_discharge_eff - batt.roundtrip_eff) > 1e-9)
    throw Error(ErrorCode::Config,
                "battery charge * discharge efficiency must equal the round-trip efficiency");
}

void SiteConfig::validate() const {
  if (!(std::fabs(latitude_deg) <= 90.0)) throw Error(ErrorCode::Config, "|latitude| must be <= 90");
  if (!(panel_tilt_deg >= 0.0 && panel_tilt_deg <= 90.0))
    throw Error(ErrorCode::Config, "panel tilt must be in [0, 90]");
  if (!(pv_peak_w > 0.0)) throw Error(ErrorCode::Config, "pv_peak_w must be > 0");
  battery.validate();
  eff.validate(battery);
}

double soc_after(double soc_pct, double net_batt_energy_wh, const BatterySpec& batt) {
  return std::clamp(soc_pct + 100.0 * net_batt_energy_wh / batt.capacity_wh, 0.0, 100.0);
}

double delta_soc(double e_pv_wh, double e_cons_wh, double eta_charge, double e_batt_wh) {
  if (!(e_batt_wh > 0.0)) throw Error(ErrorCode::InvalidArgument, "e_batt_wh must be > 0");
  return (e_pv_wh * eta_charge - e_cons_wh) * (100.0 / e_batt_wh);
}

SocDeltaTriplet delta_soc_triplet(const EnergyTriplet& pv, const EnergyTriplet& cons,
                                  double eta_charge, double e_batt_wh) {
  return {delta_soc(pv.low, cons.up, eta_charge, e_batt_wh),
          delta_soc(pv.exp, cons.exp, eta_charge, e_batt_wh),
          delta_soc(pv.up, cons.low, eta_charge, e_batt_wh)};
}

}  // namespace pvsoc
