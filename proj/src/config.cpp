#include "pvsoc/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pvsoc/ingest.hpp"

namespace pvsoc::config {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::Config, what); }

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

const json& object_or_empty(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) bad(std::string("'") + key + "' must be an object");
  return j.at(key);
}

UtcDay day_field(const json& obj, const char* key, UtcDay fallback) {
  if (!obj.contains(key)) return fallback;
  const auto d = parse_date(get_or<std::string>(obj, key, ""));
  if (!d) bad(std::string("'") + key + "' must be YYYY-MM-DD");
  return *d;
}

SiteConfig parse_site(const json& j) {
  SiteConfig s;
  s.latitude_deg = get_or(j, "latitude_deg", s.latitude_deg);
  s.longitude_deg = get_or(j, "longitude_deg", s.longitude_deg);
  s.panel_tilt_deg = get_or(j, "panel_tilt_deg", s.panel_tilt_deg);
  s.panel_azimuth_deg = get_or(j, "panel_azimuth_deg", s.panel_azimuth_deg);
  s.pv_peak_w = get_or(j, "pv_peak_w", s.pv_peak_w);
  s.timezone_offset_h = get_or(j, "timezone_offset_h", s.timezone_offset_h);

  const auto& b = object_or_empty(j, "battery");
  s.battery.capacity_wh = get_or(b, "capacity_wh", s.battery.capacity_wh);
  s.battery.soc_hard_min_pct = get_or(b, "soc_hard_min_pct", s.battery.soc_hard_min_pct);
  s.battery.roundtrip_eff = get_or(b, "roundtrip_eff", s.battery.roundtrip_eff);
  if (b.contains("max_charge_w")) s.battery.max_charge_w = get_or(b, "max_charge_w", 0.0);
  if (b.contains("max_discharge_w")) s.battery.max_discharge_w = get_or(b, "max_discharge_w", 0.0);

  const auto& e = object_or_empty(j, "eff");
  s.eff = EfficiencyChain::with_roundtrip(s.battery.roundtrip_eff);
  s.eff.mppt_eff = get_or(e, "mppt_eff", s.eff.mppt_eff);
  s.eff.inverter_eff = get_or(e, "inverter_eff", s.eff.inverter_eff);
  try {
    s.validate();
  } catch (const Error& err) {
    bad(std::string("site: ") + err.what());
  }
  return s;
}

}  // namespace

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) bad("config must be a JSON object");
  RunConfig c;
  if (!j.contains("seed")) bad("'seed' is required");
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  c.site = parse_site(object_or_empty(j, "site"));

  const auto& st = object_or_empty(j, "strategy");
  const auto kind = get_or<std::string>(st, "kind", "forecast");
  if (kind == "forecast") c.strategy = simulator::StrategySpec::Kind::Forecast;
  else if (kind == "greedy") c.strategy = simulator::StrategySpec::Kind::Greedy;
  else bad("strategy.kind must be 'forecast' or 'greedy'");
  c.soc_low_limit_pct = get_or(st, "soc_low_limit_pct", c.soc_low_limit_pct);
  c.dead_band_pct_per_h = get_or(st, "dead_band_pct_per_h", c.dead_band_pct_per_h);
  if (!(c.soc_low_limit_pct >= 0.0 && c.soc_low_limit_pct <= 100.0))
    bad("strategy.soc_low_limit_pct must be in [0, 100]");

  const auto& fc = object_or_empty(j, "forecast");
  c.load.z = get_or(fc, "z", c.load.z);
  c.pv_z = get_or(fc, "pv_z", c.pv_z);
  c.load.clustering.k_max = get_or(fc, "k_max", c.load.clustering.k_max);
  c.load.filter_window_days = get_or(fc, "filter_window_days", c.load.filter_window_days);
  c.load.clustering.seed = c.seed;
  c.load.clustering.day_offset_h = static_cast<int>(std::lround(c.site.timezone_offset_h));
  if (fc.contains("order_grid")) {
    c.load.order_grid.clear();
    for (const auto& o : fc.at("order_grid")) {
      if (!o.is_array() || o.size() != 3) bad("forecast.order_grid entries must be [p, d, q]");
      forecast_load::ArimaOrder ord{o[0].get<int>(), o[1].get<int>(), o[2].get<int>()};
      if (ord.p < 0 || ord.p > 5 || ord.d < 0 || ord.d > 1 || ord.q < 0 || ord.q > 5)
        bad("forecast.order_grid: p, q in [0, 5] and d in {0, 1}");
      c.load.order_grid.push_back(ord);
    }
    if (c.load.order_grid.empty()) bad("forecast.order_grid must not be empty");
  }
  if (!(c.load.z > 0.0) || !(c.pv_z >= 0.0)) bad("forecast z values must be positive");
  if (c.load.clustering.k_max < 1) bad("forecast.k_max must be >= 1");

  const auto& span = object_or_empty(j, "span");
  if (span.contains("start")) c.span_start = day_field(span, "start", {});
  if (span.contains("end")) c.span_end = day_field(span, "end", {});
  if (c.span_start && c.span_end && *c.span_end < *c.span_start) bad("span.end precedes span.start");

  if (j.contains("systems")) {
    if (!j.at("systems").is_array()) bad("'systems' must be an array");
    for (const auto& s : j.at("systems")) {
      SystemFiles f;
      f.id = get_or<std::string>(s, "id", "");
      if (f.id.empty() || f.id.find(',') != std::string::npos)
        bad("every system needs an id without commas");
      f.telemetry = base_dir / get_or<std::string>(s, "telemetry", "");
      f.irradiance = base_dir / get_or<std::string>(s, "irradiance", "");
      c.systems.push_back(std::move(f));
    }
  }

  const auto& sw = object_or_empty(j, "sweep");
  c.sweep.count = get_or(sw, "count", c.sweep.count);
  c.sweep.lo = get_or(sw, "lo", c.sweep.lo);
  c.sweep.hi = get_or(sw, "hi", c.sweep.hi);
  if (c.sweep.count < 1 || !(c.sweep.lo <= c.sweep.hi) || c.sweep.lo < 0.0 || c.sweep.hi > 100.0)
    bad("sweep: count >= 1 and 0 <= lo <= hi <= 100");

  const auto& sy = object_or_empty(j, "synth");
  c.synth.profile = synth::parse_profile(get_or<std::string>(sy, "profile", "market_like"));
  c.synth.days = get_or(sy, "days", c.synth.days);
  c.synth.systems = get_or(sy, "systems", c.synth.systems);
  c.synth.start = day_field(sy, "start", c.synth.start);
  c.synth.annual_load_kwh = get_or(sy, "annual_load_kwh", c.synth.annual_load_kwh);
  if (c.synth.days < 1 || c.synth.systems < 1) bad("synth: days and systems must be >= 1");

  c.output_dir = base_dir / get_or<std::string>(j, "output_dir", "out");
  c.canonical = j.dump();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    bad("config " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

void validate_inputs(const RunConfig& cfg) {
  if (cfg.systems.empty()) bad("config lists no systems");
  for (const auto& s : cfg.systems)
    for (const auto& p : {s.telemetry, s.irradiance})
      if (!std::filesystem::is_regular_file(p))
        bad("system '" + s.id + "': missing input file " + p.string());
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.canonical)));
  return buf;
}

namespace {

// Values of `s` on the grid of `ref`; throws InsufficientData when `s` does
// not cover it.
HourlyTimeSeries align_to(const HourlyTimeSeries& s, const HourlyTimeSeries& ref, const char* what) {
  const auto first = s.index_of(ref.start);
  const auto last = ref.empty() ? first : s.index_of(ref.end() - std::chrono::hours(1));
  if (!first || !last)
    throw Error(ErrorCode::InsufficientData,
                std::string(what) + " does not cover the telemetry span");
  return {ref.start,
          std::vector<double>(s.values.begin() + std::ptrdiff_t(*first),
                              s.values.begin() + std::ptrdiff_t(*last) + 1),
          s.kind};
}

}  // namespace

HourlyTimeSeries clip_to_span(const HourlyTimeSeries& s, const RunConfig& cfg) {
  UtcHour from = s.start;
  UtcHour to = s.end();
  if (cfg.span_start) from = std::max(from, UtcHour{*cfg.span_start});
  if (cfg.span_end) to = std::min(to, UtcHour{*cfg.span_end + std::chrono::days(1)});
  if (to <= from) throw Error(ErrorCode::EmptySpan, "configured span does not overlap the data");
  const auto a = static_cast<std::ptrdiff_t>((from - s.start).count());
  const auto b = static_cast<std::ptrdiff_t>((to - s.start).count());
  return {from, std::vector<double>(s.values.begin() + a, s.values.begin() + b), s.kind};
}

PreparedSystem prepare_system(const SystemFiles& files, const RunConfig& cfg) {
  PreparedSystem p;
  p.id = files.id;
  p.site = cfg.site;

  const auto tele = ingest::to_hourly(ingest::parse_telemetry_csv(files.telemetry));
  p.pv_telemetry = tele.pv;
  p.load = tele.cons;
  p.soc_telemetry = tele.soc;

  const auto irr = ingest::parse_irradiance_csv(files.irradiance);
  const auto parts = ingest::split_by_source(irr);
  if (parts.analysis.empty() || parts.forecast.empty())
    throw Error(ErrorCode::InsufficientData,
                "irradiance file needs both forecast and analysis rows");
  const auto analysis_full = ingest::to_hourly(parts.analysis, ingest::IrradianceSource::HistoricalAnalysis);
  p.ghi_forecast = ingest::to_hourly(parts.forecast, ingest::IrradianceSource::ForecastDayAhead);
  p.ghi_analysis = align_to(analysis_full, p.load, "analysis irradiance");

  auto load_model = forecast_load::LoadForecaster::fit(p.load, cfg.load);

  const auto poa = forecast_pv::poa_series(p.ghi_analysis, p.site);
  const auto mask = forecast_pv::curtailment_mask_from_soc(p.soc_telemetry.values);
  p.pv_model = forecast_pv::fit_power_regression(poa.values, p.pv_telemetry.values, mask);
  p.pv_model.site = p.site;

  // The interval of the PV forecast has to cover the irradiance forecast
  // error too, so its spread is measured on forecast GHI.
  p.pv_forecast_model = p.pv_model;
  const auto ghi_fc_aligned = align_to(p.ghi_forecast, p.load, "forecast irradiance");
  const auto poa_fc = forecast_pv::poa_series(ghi_fc_aligned, p.site);
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < poa_fc.size(); ++i) {
    if (mask[i] || !(poa.values[i] > 0.0 || poa_fc.values[i] > 0.0)) continue;
    const double pred = std::clamp(p.pv_model.slope * poa_fc.values[i] + p.pv_model.intercept, 0.0,
                                   p.site.pv_peak_w);
    sq += (p.pv_telemetry[i] - pred) * (p.pv_telemetry[i] - pred);
    ++n;
  }
  if (n > 2) p.pv_forecast_model.residual_std = std::sqrt(sq / double(n - 2));

  p.forecasts = std::make_shared<const simulator::FittedForecasts>(
      std::move(load_model), p.pv_forecast_model, p.load, p.ghi_forecast, cfg.pv_z);

  const auto potential = forecast_pv::reconstruct_potential_pv(p.ghi_analysis, p.pv_model);
  p.sim_pv_potential = clip_to_span(potential, cfg);
  p.sim_load = clip_to_span(p.load, cfg);
  const auto soc_idx = p.soc_telemetry.index_of(p.sim_load.start);
  p.initial_soc_pct = soc_idx ? p.soc_telemetry[*soc_idx] : 100.0;
  p.dead_band_pct_per_h = cfg.dead_band_pct_per_h;
  return p;
}

analysis::SystemInputs PreparedSystem::inputs() const {
  return {id, site, sim_pv_potential, sim_load, forecasts.get(), initial_soc_pct, dead_band_pct_per_h};
}

}  // namespace pvsoc::config
