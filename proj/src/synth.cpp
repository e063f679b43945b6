#include "pvsoc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pvsoc/forecast_pv.hpp"
#include "pvsoc/simulator.hpp"

namespace pvsoc::synth {

namespace {

// Hourly weights of the daily demand by local hour; each row sums to 1.
using Shape = std::array<double, 24>;

Shape normalized(Shape s) {
  double total = 0.0;
  for (double v : s) total += v;
  for (double& v : s) v /= total;
  return s;
}

// Shop open 07:00 to 21:00 with a midday plateau, nothing at night.
const Shape kMarket = normalized({0, 0, 0, 0, 0, 0, 0, 0.5, 0.8, 1, 1, 1, 1.1, 1.1, 1.1, 1, 1, 1,
                                  0.9, 0.8, 0.6, 0, 0, 0});
// Light daytime use, one evening peak, nothing at night.
const Shape kSinglePeak = normalized({0, 0, 0, 0, 0, 0, 0, 0.15, 0.15, 0.15, 0.15, 0.15, 0.15,
                                      0.15, 0.15, 0.15, 0.6, 1.2, 1.6, 1.6, 1.2, 0, 0, 0});
// Busy around the clock, highest in the evening.
const Shape kHighLoad = normalized({0.5, 0.4, 0.4, 0.4, 0.4, 0.5, 0.7, 0.9, 1, 1, 1, 1, 1, 1, 1,
                                    1, 1, 1.1, 1.3, 1.4, 1.3, 1.1, 0.8, 0.6});

constexpr double kSundayShare = 0.2;  // market Sunday demand relative to a weekday

double default_annual_kwh(Profile p) {
  switch (p) {
    case Profile::MarketLike: return 3500.0;
    case Profile::SinglePeak: return 4.0 * 365.0;
    case Profile::HighLoad: return 6000.0;
  }
  return 3500.0;
}

// Weekday-equivalent daily energy giving `annual_kwh` over a year.
double daily_kwh_for(Profile p, double annual_kwh) {
  if (p == Profile::MarketLike) return annual_kwh / (365.0 / 7.0 * (6.0 + kSundayShare));
  return annual_kwh / 365.0;
}

}  // namespace

const char* to_string(Profile p) {
  switch (p) {
    case Profile::MarketLike: return "market_like";
    case Profile::SinglePeak: return "single_peak";
    case Profile::HighLoad: return "high_load";
  }
  return "unknown";
}

Profile parse_profile(std::string_view name) {
  if (name == "market_like") return Profile::MarketLike;
  if (name == "single_peak") return Profile::SinglePeak;
  if (name == "high_load") return Profile::HighLoad;
  throw Error(ErrorCode::Config, "unknown synthetic profile '" + std::string(name) + "'");
}

double haurwitz_ghi(double cos_zenith) {
  if (cos_zenith <= 0.0) return 0.0;
  return 1098.0 * cos_zenith * std::exp(-0.057 / cos_zenith);
}

double profile_load_wh(Profile p, int local_hour, int weekday, double daily_kwh) {
  const int h = ((local_hour % 24) + 24) % 24;
  switch (p) {
    case Profile::MarketLike: {
      const double scale = weekday == 6 ? kSundayShare : 1.0;
      return 1000.0 * daily_kwh * scale * kMarket[h];
    }
    case Profile::SinglePeak: return 1000.0 * daily_kwh * kSinglePeak[h];
    case Profile::HighLoad: return 1000.0 * daily_kwh * kHighLoad[h];
  }
  return 0.0;
}

SynthSystem generate(const SynthOptions& o) {
  if (o.days < 1) throw Error(ErrorCode::Config, "synthetic span needs at least one day");
  if (!(o.plant_slope > 0.0)) throw Error(ErrorCode::Config, "plant_slope must be > 0");
  o.site.validate();

  const bool noiseless = o.profile == Profile::SinglePeak;
  const double annual = o.annual_load_kwh > 0.0 ? o.annual_load_kwh : default_annual_kwh(o.profile);
  const double daily_kwh = daily_kwh_for(o.profile, annual);
  const std::size_t n = static_cast<std::size_t>(o.days) * 24;
  const UtcHour start{o.start};
  const int offset = static_cast<int>(std::lround(o.site.timezone_offset_h));

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SynthSystem s;
  s.load = {start, std::vector<double>(n), SeriesKind::EnergyWh};
  s.pv_potential = s.load;
  s.ghi_analysis = s.load;
  s.ghi_forecast = s.load;

  double cloud = 0.0;  // AR(1) across days
  double load_ar = 0.0;  // AR(1) across hours
  for (int d = 0; d < o.days; ++d) {
    cloud = 0.6 * cloud + 0.8 * normal(rng);
    const double day_attenuation = noiseless ? 1.0 : std::clamp(0.8 + 0.15 * cloud, 0.3, 1.0);
    const double forecast_day_err = normal(rng);
    const double load_day_factor = noiseless ? 1.0 : std::max(0.3, 1.0 + 0.1 * normal(rng));
    for (int h = 0; h < 24; ++h) {
      const std::size_t i = static_cast<std::size_t>(d) * 24 + h;
      const UtcHour t = s.load.time_at(i);
      const UtcHour local = t + std::chrono::hours(offset);

      const auto sun = forecast_pv::sun_position_mid_hour(o.site, t);
      const double cos_z = std::cos(sun.zenith_deg * std::numbers::pi / 180.0);
      double ghi = haurwitz_ghi(cos_z);
      if (!noiseless) ghi *= std::clamp(day_attenuation * (1.0 + 0.08 * normal(rng)), 0.0, 1.05);
      s.ghi_analysis.values[i] = ghi;

      double ghi_fc = ghi;
      if (!noiseless) {
        const double err = 0.8 * forecast_day_err + 0.6 * normal(rng);
        ghi_fc = std::max(0.0, ghi * (1.0 + o.forecast_noise * err));
      }
      s.ghi_forecast.values[i] = ghi_fc;

      const double poa = forecast_pv::project_to_poa(ghi, t, o.site);
      s.pv_potential.values[i] = std::min(o.site.pv_peak_w, o.plant_slope * poa);

      const double base = profile_load_wh(o.profile, hour_of_day(local), weekday_index(day_of(local)),
                                          daily_kwh);
      double load = base;
      if (!noiseless && base > 0.0) {
        load_ar = 0.5 * load_ar + normal(rng);
        load = std::max(0.0, base * load_day_factor * (1.0 + o.load_noise * load_ar));
      }
      s.load.values[i] = load;
    }
  }

  const auto run = simulator::run_scenario(s.pv_potential, s.load, simulator::StrategySpec::greedy(),
                                           nullptr, o.site, {std::nullopt, false});
  s.telemetry.reserve(n);
  s.irradiance.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& st = run.steps[i];
    const UtcHour t = s.load.time_at(i);
    s.telemetry.push_back({t, st.pv_used_wh(), st.served_wh(), st.soc_end_pct});
    s.irradiance.push_back({t, s.ghi_forecast.values[i], ingest::IrradianceSource::ForecastDayAhead});
    s.irradiance.push_back({t, s.ghi_analysis.values[i], ingest::IrradianceSource::HistoricalAnalysis});
  }
  return s;
}

std::pair<std::filesystem::path, std::filesystem::path> write_system(
    const SynthSystem& sys, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto telemetry = dir / "telemetry.csv";
  auto irradiance = dir / "irradiance.csv";
  ingest::write_telemetry_csv(telemetry, sys.telemetry);
  ingest::write_irradiance_csv(irradiance, sys.irradiance);
  return {telemetry, irradiance};
}

}  // namespace pvsoc::synth
