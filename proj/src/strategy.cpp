#include "pvsoc/strategy.hpp"

#include <algorithm>
#include <cmath>

#include "pvsoc/kernels.hpp"

namespace pvsoc::strategy {

StrategyParams StrategyParams::for_site(const SiteConfig& site, double soc_low_limit_pct) {
  return {soc_low_limit_pct, site.battery.capacity_wh, site.eff.pv_to_battery()};
}

void StrategyParams::validate() const {
  if (!(soc_low_limit_pct >= 0.0 && soc_low_limit_pct <= 100.0))
    throw Error(ErrorCode::Config, "soc_low_limit_pct must be in [0, 100]");
  if (!(e_batt_wh > 0.0)) throw Error(ErrorCode::Config, "e_batt_wh must be > 0");
  if (!(eta_charge > 0.0)) throw Error(ErrorCode::Config, "eta_charge must be > 0");
}

const char* to_string(ChargeMode mode) {
  switch (mode) {
    case ChargeMode::ChargeFromSurplus: return "charge";
    case ChargeMode::HoldCurtailAboveCap: return "hold";
    case ChargeMode::SafeguardCharge: return "safeguard";
  }
  return "unknown";
}

std::vector<double> expected_soc_rate(const ForecastPair& f, const StrategyParams& params) {
  if (f.pv.size() != f.load.size())
    throw Error(ErrorCode::SeriesMisaligned, "PV and load forecasts differ in length");
  if (!(params.e_batt_wh > 0.0)) throw Error(ErrorCode::InvalidArgument, "e_batt_wh must be > 0");
  const auto pv = f.pv.expected();
  const auto load = f.load.expected();
  std::vector<double> rate(pv.size());
  kernels::delta_soc_batch(pv, load, params.eta_charge, params.e_batt_wh, rate);
  return rate;
}

PeriodBoundaries detect_periods(std::span<const double> r, double eps) {
  const int n = static_cast<int>(r.size());
  PeriodBoundaries p;
  if (n == 0) return p;
  // Candidates end at the first night-long gap after a surplus hour, so a
  // sunnier tomorrow cannot displace today's window.
  int first = 0;
  while (first < n && !(r[first] > eps)) ++first;
  if (first == n) {
    p.t_ed = n;  // no surplus: the whole horizon is discharge
    return p;
  }
  int stop = first;
  for (int gap = 0; stop < n; ++stop) {
    gap = r[stop] > eps ? 0 : gap + 1;
    if (gap >= kNightMinHours) break;
  }
  const int peak = static_cast<int>(std::max_element(r.begin() + first, r.begin() + stop) - r.begin());
  int s = peak;
  while (s > 0 && r[s - 1] > eps) --s;
  int e = peak + 1;
  while (e < n && r[e] > eps) ++e;
  p.t_sc = s;
  p.t_ec = e;
  p.t_sd = e;
  int i = e;
  while (i < n && std::fabs(r[i]) <= eps) ++i;
  if (i < n && r[i] < -eps) {
    int j = i;
    while (j < n && r[j] < -eps) ++j;
    p.t_ed = j;
  } else {
    p.t_ed = e;
  }
  return p;
}

PeriodBoundaries detect_periods(const ForecastPair& f, const StrategyParams& params, double eps) {
  const auto r = expected_soc_rate(f, params);
  return detect_periods(r, eps);
}

SocDeltaTriplet interval_delta(const IntervalIndex& pv, const IntervalIndex& load,
                               const StrategyParams& params, int first, int last) {
  return delta_soc_triplet(pv.interval(first, last), load.interval(first, last),
                           params.eta_charge, params.e_batt_wh);
}

double compute_soc_low_goal(const StrategyParams& params, const SocDeltaTriplet& d) {
  // The error term is formed first so a zero-width interval yields the limit bit for bit.
  const double error = d.exp - d.low;
  return std::clamp(params.soc_low_limit_pct + error, params.soc_low_limit_pct, 100.0);
}

double compute_soc_up_limit(double goal, double dsoc_exp_discharge) {
  if (dsoc_exp_discharge > 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "expected SOC change over a discharge period must not be positive");
  return std::clamp(goal - dsoc_exp_discharge, goal, 100.0);
}

bool should_start_charging(double soc_now, double cap, double dsoc_low_remaining) {
  if (soc_now >= cap) return false;
  return cap >= soc_now + dsoc_low_remaining;
}

DaySetpoints plan(const ForecastPair& f, const StrategyParams& params, double soc_now,
                  double eps) {
  const auto rate = expected_soc_rate(f, params);
  DaySetpoints sp;
  sp.periods = detect_periods(rate, eps);
  const IntervalIndex pv(f.pv);
  const IntervalIndex load(f.load);
  const auto& p = sp.periods;

  sp.discharge = interval_delta(pv, load, params, p.t_sd, p.t_ed);
  sp.soc_low_goal_pct = compute_soc_low_goal(params, sp.discharge);
  // Without a charge window there is nothing to cap.
  sp.soc_up_limit_pct = p.has_charge_window()
                            ? compute_soc_up_limit(sp.soc_low_goal_pct, std::min(sp.discharge.exp, 0.0))
                            : sp.soc_low_goal_pct;
  sp.dsoc_low_to_charge_end = interval_delta(pv, load, params, 0, p.t_ec).low;

  sp.t_start_charge = p.t_ec;
  double soc = soc_now;
  for (int h = 0; h <= p.t_ec && p.has_charge_window(); ++h) {
    if (h >= p.t_sc) {
      // Hour h is the last one that can be skipped only if the charge left
      // after it still reaches the cap, so compare against [h + 1, t_ec).
      const double after = interval_delta(pv, load, params, h + 1, p.t_ec).low;
      if (soc < params.soc_low_limit_pct ||
          should_start_charging(soc, sp.soc_up_limit_pct, after)) {
        sp.t_start_charge = h;
        break;
      }
    }
    // holding: surplus is curtailed, deficits still drain the battery
    if (h < static_cast<int>(rate.size())) soc = std::max(0.0, soc + std::min(0.0, rate[h]));
  }
  return sp;
}

ChargeCommand decide(double soc_now, const DaySetpoints& sp, const StrategyParams& params,
                     int hours_since_plan, bool latched) {
  if (soc_now < params.soc_low_limit_pct) return {ChargeMode::SafeguardCharge, 100.0};
  if (latched || hours_since_plan >= sp.t_start_charge)
    return {ChargeMode::ChargeFromSurplus, sp.soc_up_limit_pct};
  return {ChargeMode::HoldCurtailAboveCap, std::clamp(soc_now, 0.0, 100.0)};
}

ChargeCommand greedy_decision(double) { return {ChargeMode::ChargeFromSurplus, 100.0}; }

}  // namespace pvsoc::strategy
