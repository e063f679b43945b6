#include "pvsoc/forecast_pv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pvsoc/kernels.hpp"

namespace pvsoc::forecast_pv {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kSolarConstant = 1367.0;  // W/m2
const double kCosZenithFloor = std::cos(85.0 * kDeg);

int day_of_year(UtcDay d) {
  const std::chrono::year_month_day ymd{d};
  const UtcDay jan1{ymd.year() / std::chrono::January / 1};
  return static_cast<int>((d - jan1).count()) + 1;
}

}  // namespace

SunPosition sun_position(const SiteConfig& site, std::chrono::sys_seconds time) {
  const UtcDay day = std::chrono::floor<std::chrono::days>(time);
  const double utc_hours = std::chrono::duration<double, std::ratio<3600>>(time - day).count();
  const int doy = day_of_year(day);

  const double g = 2.0 * std::numbers::pi / 365.0 * (doy - 1 + (utc_hours - 12.0) / 24.0);
  const double decl = 0.006918 - 0.399912 * std::cos(g) + 0.070257 * std::sin(g) -
                      0.006758 * std::cos(2 * g) + 0.000907 * std::sin(2 * g) -
                      0.002697 * std::cos(3 * g) + 0.00148 * std::sin(3 * g);
  const double eot_min = 229.18 * (0.000075 + 0.001868 * std::cos(g) - 0.032077 * std::sin(g) -
                                   0.014615 * std::cos(2 * g) - 0.040849 * std::sin(2 * g));

  const double solar_min = utc_hours * 60.0 + 4.0 * site.longitude_deg + eot_min;
  const double hour_angle = (solar_min / 4.0 - 180.0) * kDeg;
  const double lat = site.latitude_deg * kDeg;

  const double cos_z = std::clamp(std::sin(lat) * std::sin(decl) +
                                      std::cos(lat) * std::cos(decl) * std::cos(hour_angle),
                                  -1.0, 1.0);
  SunPosition s;
  s.zenith_deg = std::acos(cos_z) / kDeg;
  // azimuth measured from south (west positive), shifted to north-clockwise
  const double az_south = std::atan2(std::sin(hour_angle),
                                     std::cos(hour_angle) * std::sin(lat) -
                                         std::tan(decl) * std::cos(lat));
  double az = az_south / kDeg + 180.0;
  az = std::fmod(az, 360.0);
  if (az < 0.0) az += 360.0;
  s.azimuth_deg = az;
  return s;
}

SunPosition sun_position_mid_hour(const SiteConfig& site, UtcHour hour_start) {
  return sun_position(site, std::chrono::sys_seconds{hour_start} + std::chrono::minutes(30));
}

double extraterrestrial_normal(int doy) {
  return kSolarConstant * (1.0 + 0.033 * std::cos(2.0 * std::numbers::pi * doy / 365.0));
}

double erbs_diffuse_fraction(double kt) {
  if (kt <= 0.22) return 1.0 - 0.09 * kt;
  if (kt <= 0.80)
    return 0.9511 - 0.1604 * kt + 4.388 * kt * kt - 16.638 * kt * kt * kt +
           12.336 * kt * kt * kt * kt;
  return 0.165;
}

double project_to_poa(double ghi, const SunPosition& sun, const SiteConfig& site, int doy,
                      double albedo) {
  if (ghi <= 0.0) return 0.0;
  if (site.panel_tilt_deg == 0.0) return ghi;  // horizontal plane sees GHI by definition
  const double cos_z = std::cos(sun.zenith_deg * kDeg);
  if (cos_z <= 0.0) return 0.0;

  const double cos_z_floored = std::max(cos_z, kCosZenithFloor);
  const double kt = std::clamp(ghi / (extraterrestrial_normal(doy) * cos_z_floored), 0.0, 1.0);
  const double diffuse = erbs_diffuse_fraction(kt) * ghi;
  const double beam_h = ghi - diffuse;

  const double tilt = site.panel_tilt_deg * kDeg;
  const double sin_z = std::sin(sun.zenith_deg * kDeg);
  const double cos_inc = cos_z * std::cos(tilt) +
                         sin_z * std::sin(tilt) *
                             std::cos((sun.azimuth_deg - site.panel_azimuth_deg) * kDeg);

  const double beam = beam_h * std::max(0.0, cos_inc) / cos_z_floored;
  const double sky = diffuse * (1.0 + std::cos(tilt)) / 2.0;
  const double ground = ghi * albedo * (1.0 - std::cos(tilt)) / 2.0;
  return beam + sky + ground;
}

double project_to_poa(double ghi, UtcHour hour_start, const SiteConfig& site, double albedo) {
  const auto sun = sun_position_mid_hour(site, hour_start);
  return project_to_poa(ghi, sun, site, day_of_year(day_of(hour_start)), albedo);
}

HourlyTimeSeries poa_series(const HourlyTimeSeries& ghi, const SiteConfig& site) {
  HourlyTimeSeries out{ghi.start, std::vector<double>(ghi.size()), SeriesKind::EnergyWh};
  for (std::size_t i = 0; i < ghi.size(); ++i)
    out.values[i] = project_to_poa(ghi[i], ghi.time_at(i), site);
  return out;
}

RegressionModel fit_power_regression(std::span<const double> poa, std::span<const double> pv,
                                     const std::vector<bool>& mask, std::size_t min_pairs) {
  if (poa.size() != pv.size() || (!mask.empty() && mask.size() != poa.size()))
    throw Error(ErrorCode::InvalidArgument, "regression inputs differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < poa.size(); ++i) {
    if (!mask.empty() && mask[i]) continue;
    if (!(poa[i] > 0.0)) continue;
    x.push_back(poa[i]);
    y.push_back(pv[i]);
  }
  const std::size_t n = x.size();
  if (n < std::max<std::size_t>(min_pairs, 2))
    throw Error(ErrorCode::InsufficientData, "regression needs " + std::to_string(min_pairs) +
                                                 " non-curtailed daylight pairs, got " +
                                                 std::to_string(n));
  const double mx = kernels::sum(x) / double(n);
  const double my = kernels::sum(y) / double(n);
  const double sxx = kernels::sum_sq_dev(x, mx);
  if (!(sxx > 1e-12 * double(n) * std::max(1.0, mx * mx)))
    throw Error(ErrorCode::DegenerateInput, "plane-of-array irradiation has zero variance");
  std::vector<double> dx(n);
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] - mx;
  const double sxy = kernels::dot(dx, y);

  RegressionModel m;
  m.slope = sxy / sxx;
  m.intercept = my - m.slope * mx;
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - (m.intercept + m.slope * x[i]);
  const double ssr = kernels::sum_sq_dev(r, 0.0);
  m.residual_std = n > 2 ? std::sqrt(ssr / double(n - 2)) : 0.0;
  m.slope_std_error = m.residual_std / std::sqrt(sxx);
  m.n_train = n;
  return m;
}

std::vector<bool> curtailment_mask_from_soc(std::span<const double> soc, double full_soc_pct) {
  std::vector<bool> mask(soc.size());
  for (std::size_t i = 0; i < soc.size(); ++i) mask[i] = soc[i] >= full_soc_pct;
  return mask;
}

PvForecast forecast_pv(const RegressionModel& model, UtcHour start, std::span<const double> ghi,
                       double z) {
  if (!model.fitted()) throw Error(ErrorCode::UnfittedModel, "PV regression is not fitted");
  const double peak = model.site.pv_peak_w;  // one hour at peak, in Wh
  PvForecast out;
  out.start = start;
  out.z = z;
  out.hourly.resize(ghi.size());
  for (std::size_t h = 0; h < ghi.size(); ++h) {
    const double poa = project_to_poa(ghi[h], start + std::chrono::hours(h), model.site);
    if (poa <= 0.0) continue;
    auto& t = out.hourly[h];
    const double raw = model.slope * poa + model.intercept;
    t.exp = std::clamp(raw, 0.0, peak);
    t.low = std::clamp(raw - z * model.residual_std, 0.0, peak);
    t.up = std::clamp(raw + z * model.residual_std, 0.0, peak);
  }
  return out;
}

PvForecast forecast_pv_24h(const RegressionModel& model, UtcHour start,
                           std::span<const double> ghi, double z) {
  if (ghi.size() != 24)
    throw Error(ErrorCode::InvalidArgument, "forecast_pv_24h needs 24 hourly GHI values");
  return forecast_pv(model, start, ghi, z);
}

HourlyTimeSeries reconstruct_potential_pv(const HourlyTimeSeries& ghi,
                                          const RegressionModel& model) {
  if (!model.fitted()) throw Error(ErrorCode::UnfittedModel, "PV regression is not fitted");
  HourlyTimeSeries out{ghi.start, std::vector<double>(ghi.size(), 0.0), SeriesKind::EnergyWh};
  for (std::size_t i = 0; i < ghi.size(); ++i) {
    const double poa = project_to_poa(ghi[i], ghi.time_at(i), model.site);
    if (poa > 0.0)
      out.values[i] = std::clamp(model.slope * poa + model.intercept, 0.0, model.site.pv_peak_w);
  }
  return out;
}

nlohmann::json RegressionModel::to_json() const {
  return {{"slope", slope},
          {"intercept", intercept},
          {"residual_std", residual_std},
          {"n_train", n_train},
          {"slope_std_error", slope_std_error},
          {"site",
           {{"latitude_deg", site.latitude_deg},
            {"longitude_deg", site.longitude_deg},
            {"panel_tilt_deg", site.panel_tilt_deg},
            {"panel_azimuth_deg", site.panel_azimuth_deg},
            {"pv_peak_w", site.pv_peak_w},
            {"timezone_offset_h", site.timezone_offset_h}}}};
}

RegressionModel RegressionModel::from_json(const nlohmann::json& j) {
  try {
    RegressionModel m;
    m.slope = j.at("slope").get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.residual_std = j.at("residual_std").get<double>();
    m.n_train = j.at("n_train").get<std::size_t>();
    m.slope_std_error = j.value("slope_std_error", 0.0);
    const auto& s = j.at("site");
    m.site.latitude_deg = s.at("latitude_deg").get<double>();
    m.site.longitude_deg = s.at("longitude_deg").get<double>();
    m.site.panel_tilt_deg = s.at("panel_tilt_deg").get<double>();
    m.site.panel_azimuth_deg = s.at("panel_azimuth_deg").get<double>();
    m.site.pv_peak_w = s.at("pv_peak_w").get<double>();
    m.site.timezone_offset_h = s.at("timezone_offset_h").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("PV model JSON: ") + e.what());
  }
}

}  // namespace pvsoc::forecast_pv
