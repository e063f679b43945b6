#include "pvsoc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace pvsoc::simulator {

StepResult step(const SimState& state, const StepInput& in, const strategy::ChargeCommand& cmd,
                const SiteConfig& site) {
  const auto& batt = site.battery;
  const auto& eff = site.eff;
  const double pv = std::max(0.0, in.pv_potential_wh);
  const double load = std::max(0.0, in.load_wh);

  StepResult r;
  r.soc_start_pct = state.soc_pct;
  double soc = state.soc_pct;

  // (1) direct path
  const double direct = eff.direct_path();
  const double pv_for_load = load / direct;
  if (pv >= pv_for_load) {
    r.pv_direct_wh = pv_for_load;
    r.served_direct_wh = load;
  } else {
    r.pv_direct_wh = pv;
    r.served_direct_wh = pv * direct;
  }

  // (2) battery covers the deficit down to the hard floor, (3) rest unserved
  const double deficit = load - r.served_direct_wh;
  if (deficit > 0.0) {
    const double to_load = eff.battery_to_load();
    const double need = deficit / to_load;
    const double avail = std::max(0.0, (soc - batt.soc_hard_min_pct) / 100.0 * batt.capacity_wh);
    const double limit = batt.max_discharge_w.value_or(std::numeric_limits<double>::infinity());
    const double dis = std::min({need, avail, limit});
    r.batt_discharge_wh = dis;
    r.served_battery_wh = dis == need ? deficit : dis * to_load;
    r.unserved_wh = deficit - r.served_battery_wh;
    soc = soc_after(soc, -dis, batt);
  }

  // (4) surplus charges up to the commanded cap, (5) the rest is curtailed
  const double surplus = pv - r.pv_direct_wh;
  if (surplus > 0.0 && cmd.soc_cap_pct > soc) {
    const double to_batt = eff.pv_to_battery();
    const double possible = surplus * to_batt;
    const double headroom = (std::min(cmd.soc_cap_pct, 100.0) - soc) / 100.0 * batt.capacity_wh;
    const double limit = batt.max_charge_w.value_or(std::numeric_limits<double>::infinity());
    const double charge = std::min({possible, headroom, limit});
    r.batt_charge_wh = charge;
    r.charge_input_wh = charge == possible ? surplus : charge / to_batt;
    soc = soc_after(soc, charge, batt);
  }
  r.curtailed_wh = std::max(0.0, surplus - r.charge_input_wh);
  r.soc_end_pct = soc;
  r.outage = r.unserved_wh > 1e-9 * std::max(1.0, load);
  if (!r.outage) r.unserved_wh = 0.0;
  return r;
}

void advance(SimState& state, const StepResult& r) {
  state.soc_pct = r.soc_end_pct;
  state.t += std::chrono::hours(1);
  state.served_wh += r.served_wh();
  state.curtailed_wh += r.curtailed_wh;
  state.unserved_wh += r.unserved_wh;
  if (r.outage) ++state.outage_hours;
}

double balance_residual(const StepInput& in, const StepResult& r, const SiteConfig& site) {
  const double scale = std::max({1.0, std::fabs(in.pv_potential_wh), std::fabs(in.load_wh)});
  const auto& eff = site.eff;
  const double pv_res =
      std::fabs(in.pv_potential_wh - (r.pv_direct_wh + r.charge_input_wh + r.curtailed_wh));
  const double load_res =
      std::fabs(in.load_wh - (r.served_direct_wh + r.served_battery_wh + r.unserved_wh));
  const double direct_res = std::fabs(r.served_direct_wh - r.pv_direct_wh * eff.direct_path());
  const double charge_res = std::fabs(r.batt_charge_wh - r.charge_input_wh * eff.pv_to_battery());
  const double dis_res = std::fabs(r.served_battery_wh - r.batt_discharge_wh * eff.battery_to_load());
  const double soc_res = std::fabs((r.soc_end_pct - r.soc_start_pct) / 100.0 * site.battery.capacity_wh -
                                   (r.batt_charge_wh - r.batt_discharge_wh));
  return std::max({pv_res, load_res, direct_res, charge_res, dis_res, soc_res}) / scale;
}

// ------------------------------------------------------------------ forecasts

namespace {

double value_or_persisted(const HourlyTimeSeries& s, UtcHour t) {
  while (t >= s.start) {
    if (auto i = s.index_of(t)) return s[*i];
    t -= std::chrono::hours(24);
  }
  return 0.0;
}

}  // namespace

ForecastPair oracle_forecasts(const HourlyTimeSeries& pv, const HourlyTimeSeries& load,
                              UtcHour t_p, std::size_t hours) {
  std::vector<double> p(hours), l(hours);
  for (std::size_t h = 0; h < hours; ++h) {
    const UtcHour t = t_p + std::chrono::hours(h);
    p[h] = value_or_persisted(pv, t);
    l[h] = value_or_persisted(load, t);
  }
  return {EnergyForecast::exact(t_p, std::move(l)), EnergyForecast::exact(t_p, std::move(p))};
}

FittedForecasts::FittedForecasts(forecast_load::LoadForecaster load_model,
                                 forecast_pv::RegressionModel pv_model,
                                 HourlyTimeSeries load_history, HourlyTimeSeries ghi_forecast,
                                 double pv_z)
    : load_model_(std::move(load_model)),
      pv_model_(std::move(pv_model)),
      load_history_(std::move(load_history)),
      ghi_forecast_(std::move(ghi_forecast)),
      pv_z_(pv_z),
      day_offset_h_(load_model_.settings().clustering.day_offset_h) {
  if (!load_model_.fitted()) throw Error(ErrorCode::UnfittedModel, "load forecaster is not fitted");
  const auto pv_all = forecast_pv::forecast_pv(pv_model_, ghi_forecast_.start, ghi_forecast_.values, pv_z_);
  pv_triplets_ = pv_all.hourly;

  const auto off = std::chrono::hours(day_offset_h_);
  cache_first_ = std::chrono::floor<std::chrono::days>(load_history_.start + off);
  const UtcDay last = std::chrono::floor<std::chrono::days>(load_history_.end() + off);
  for (UtcDay d = cache_first_; d <= last; d += std::chrono::days(1)) {
    DayEntry e;
    e.same_day = load_model_.forecast_day(load_history_, d, d);
    e.next_day = load_model_.forecast_day(load_history_, d + std::chrono::days(1), d);
    days_.push_back(std::move(e));
  }
}

const FittedForecasts::DayEntry& FittedForecasts::entry(UtcDay local_day) const {
  const auto idx = (local_day - cache_first_).count();
  if (idx < 0 || idx >= static_cast<long>(days_.size()))
    throw Error(ErrorCode::SeriesMisaligned,
                "no load forecast for local day " + format_date(local_day));
  return days_[static_cast<std::size_t>(idx)];
}

PvForecast FittedForecasts::pv_hours(UtcHour from, std::size_t hours) const {
  PvForecast out;
  out.start = from;
  out.z = pv_z_;
  out.hourly.resize(hours);
  for (std::size_t h = 0; h < hours; ++h) {
    UtcHour t = from + std::chrono::hours(h);
    // past the end of the irradiance forecast: persist the previous day
    while (t >= ghi_forecast_.start) {
      if (auto i = ghi_forecast_.index_of(t)) {
        out.hourly[h] = pv_triplets_[*i];
        break;
      }
      t -= std::chrono::hours(24);
    }
  }
  return out;
}

ForecastPair FittedForecasts::horizon(UtcHour t_p, std::size_t hours) const {
  if (hours > 24) throw Error(ErrorCode::InvalidArgument, "fitted forecasts cover at most 24 h");
  const auto off = std::chrono::hours(day_offset_h_);
  const UtcDay day = std::chrono::floor<std::chrono::days>(t_p + off);
  const auto hp = static_cast<std::size_t>((t_p + off - UtcHour{day}).count());
  const auto& e = entry(day);
  LoadForecast load = EnergyForecast::join(e.same_day.slice(hp, 24), e.next_day.slice(0, hp));
  if (hours < 24) load = load.slice(0, hours);
  return {std::move(load), pv_hours(t_p, hours)};
}

// ------------------------------------------------------------------ scenario

ScenarioResult run_scenario(const HourlyTimeSeries& pv, const HourlyTimeSeries& load,
                            const StrategySpec& spec, const ForecastProvider* forecasts,
                            const SiteConfig& site, const ScenarioOptions& options) {
  if (pv.start != load.start || pv.size() != load.size())
    throw Error(ErrorCode::SeriesMisaligned, "PV and load series must share start and length");
  const bool forecast_based = spec.kind == StrategySpec::Kind::Forecast;
  if (forecast_based) {
    if (forecasts == nullptr)
      throw Error(ErrorCode::InvalidArgument, "forecast strategy needs a forecast provider");
    spec.params.validate();
  }

  ScenarioResult out;
  SimState state;
  state.t = pv.start;
  state.soc_pct = std::clamp(options.initial_soc_pct.value_or(100.0), 0.0, 100.0);

  const std::size_t n = pv.size();
  out.soc = {pv.start, std::vector<double>(n), SeriesKind::SocPct};
  out.inputs.resize(n);
  out.steps.resize(n);
  if (forecast_based && options.record_setpoints) out.setpoints.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const UtcHour t = state.t;
    strategy::ChargeCommand cmd;
    if (!forecast_based) {
      cmd = strategy::greedy_decision(state.soc_pct);
    } else {
      if (state.latched_charge && t >= state.latch_until) state.latched_charge = false;
      const auto fp = forecasts->horizon(t);
      const auto sp = strategy::plan(fp, spec.params, state.soc_pct, options.eps_pct_per_h);
      cmd = strategy::decide(state.soc_pct, sp, spec.params, 0, state.latched_charge);
      if (cmd.mode == strategy::ChargeMode::ChargeFromSurplus && !state.latched_charge &&
          sp.periods.has_charge_window()) {
        state.latched_charge = true;
        state.latch_until = t + std::chrono::hours(sp.periods.t_ec);
      }
      if (options.record_setpoints)
        out.setpoints.push_back({t, state.soc_pct, sp.soc_low_goal_pct, sp.soc_up_limit_pct,
                                 t + std::chrono::hours(sp.t_start_charge),
                                 t + std::chrono::hours(sp.periods.t_sd),
                                 t + std::chrono::hours(sp.periods.t_ed), cmd.mode});
    }
    const StepInput in{pv[i], load[i]};
    const auto r = step(state, in, cmd, site);
    advance(state, r);
    out.inputs[i] = in;
    out.steps[i] = r;
    out.soc.values[i] = r.soc_end_pct;
  }
  out.final_state = state;
  return out;
}

// ------------------------------------------------------------------------ CSV

void write_trajectory_csv(std::ostream& out, const ScenarioResult& r) {
  out << "timestamp,soc_pct,pv_direct_wh,batt_charge_wh,batt_discharge_wh,curtailed_wh,unserved_wh\n";
  out.precision(10);
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const auto& s = r.steps[i];
    out << format_utc(r.soc.time_at(i)) << ',' << s.soc_end_pct << ',' << s.pv_direct_wh << ','
        << s.batt_charge_wh << ',' << s.batt_discharge_wh << ',' << s.curtailed_wh << ','
        << s.unserved_wh << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const ScenarioResult& r) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_trajectory_csv(out, r);
}

void write_setpoint_log_csv(std::ostream& out, const ScenarioResult& r) {
  out << "t_p,soc_now,soc_low_goal,soc_up_limit,t_start_charge,t_sd,t_ed,mode\n";
  out.precision(10);
  for (const auto& row : r.setpoints)
    out << format_utc(row.t_p) << ',' << row.soc_now_pct << ',' << row.soc_low_goal_pct << ','
        << row.soc_up_limit_pct << ',' << format_utc(row.t_start_charge) << ','
        << format_utc(row.t_sd) << ',' << format_utc(row.t_ed) << ','
        << strategy::to_string(row.mode) << '\n';
}

void write_setpoint_log_csv(const std::filesystem::path& path, const ScenarioResult& r) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_setpoint_log_csv(out, r);
}

}  // namespace pvsoc::simulator
