#include "pvsoc/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pvsoc/kernels.hpp"

namespace pvsoc::analysis {

namespace {

std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_num(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) throw MalformedRowError(line, "bad number '" + std::string(s) + "'");
  return v;
}

std::ofstream create(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

nlohmann::json kpi_json(const KpiReport& k) {
  return {{"pv_generation_wh", k.pv_generation_wh},
          {"consumption_wh", k.consumption_wh},
          {"avg_system_efficiency", k.avg_system_efficiency},
          {"soc_ci_75", {k.soc_ci_lo, k.soc_ci_hi}},
          {"direct_consumption_rate", k.direct_consumption_rate},
          {"capacity_factor", k.capacity_factor},
          {"outage_hours", k.outage_hours},
          {"avg_soc_pct", k.avg_soc_pct},
          {"full_charge_hours_per_day", k.full_charge_hours_per_day},
          {"load_share_direct", k.load_share_direct},
          {"load_share_battery", k.load_share_battery},
          {"load_share_unserved", k.load_share_unserved}};
}

KpiReport kpi_from_json(const nlohmann::json& j) {
  KpiReport k;
  k.pv_generation_wh = j.at("pv_generation_wh").get<double>();
  k.consumption_wh = j.at("consumption_wh").get<double>();
  k.avg_system_efficiency = j.at("avg_system_efficiency").get<double>();
  k.soc_ci_lo = j.at("soc_ci_75").at(0).get<double>();
  k.soc_ci_hi = j.at("soc_ci_75").at(1).get<double>();
  k.direct_consumption_rate = j.at("direct_consumption_rate").get<double>();
  k.capacity_factor = j.at("capacity_factor").get<double>();
  k.outage_hours = j.at("outage_hours").get<double>();
  k.avg_soc_pct = j.at("avg_soc_pct").get<double>();
  k.full_charge_hours_per_day = j.at("full_charge_hours_per_day").get<double>();
  k.load_share_direct = j.at("load_share_direct").get<double>();
  k.load_share_battery = j.at("load_share_battery").get<double>();
  k.load_share_unserved = j.at("load_share_unserved").get<double>();
  return k;
}

}  // namespace

double percentile_sorted(std::span<const double> s, double p) {
  if (s.empty()) throw Error(ErrorCode::EmptySpan, "percentile of an empty sample");
  const double pos = std::clamp(p, 0.0, 1.0) * double(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - double(lo);
  return s[lo] + (s[hi] - s[lo]) * frac;
}

double percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return percentile_sorted(values, p);
}

KpiReport compute_kpis(const simulator::ScenarioResult& run, const SiteConfig& site,
                       double full_threshold) {
  const std::size_t n = run.steps.size();
  if (n == 0 || run.soc.size() != n) throw Error(ErrorCode::EmptySpan, "no simulated hours");

  KpiReport k;
  double direct = 0.0, battery = 0.0, unserved = 0.0, demand = 0.0;
  std::size_t full = 0, outages = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = run.steps[i];
    k.pv_generation_wh += s.pv_used_wh();
    direct += s.served_direct_wh;
    battery += s.served_battery_wh;
    unserved += s.unserved_wh;
    demand += i < run.inputs.size() ? run.inputs[i].load_wh : s.served_wh() + s.unserved_wh;
    if (s.soc_end_pct >= full_threshold) ++full;
    if (s.outage) ++outages;
  }
  k.consumption_wh = direct + battery;
  k.avg_system_efficiency = k.pv_generation_wh > 0.0 ? k.consumption_wh / k.pv_generation_wh : 0.0;
  k.direct_consumption_rate = k.consumption_wh > 0.0 ? direct / k.consumption_wh : 0.0;
  k.capacity_factor = k.pv_generation_wh / double(n) / site.pv_peak_w;
  k.outage_hours = double(outages);
  k.avg_soc_pct = kernels::sum(run.soc.values) / double(n);
  k.full_charge_hours_per_day = double(full) / (double(n) / 24.0);
  if (demand > 0.0) {
    k.load_share_direct = direct / demand;
    k.load_share_battery = battery / demand;
    k.load_share_unserved = unserved / demand;
  }

  std::vector<double> sorted(run.soc.values);
  std::sort(sorted.begin(), sorted.end());
  k.soc_ci_lo = percentile_sorted(sorted, 0.125);
  k.soc_ci_hi = percentile_sorted(sorted, 0.875);
  return k;
}

std::vector<double> sweep_limits(int count, double lo, double hi) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one limit");
  if (count == 1) return {hi};
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * double(i) / double(count - 1);
  v.back() = hi;
  return v;
}

std::vector<SweepRow> SweepResult::for_system(const std::string& id) const {
  std::vector<SweepRow> out;
  for (const auto& r : rows)
    if (r.system_id == id) out.push_back(r);
  return out;
}

KpiReport run_kpis(const SystemInputs& sys, const simulator::StrategySpec& spec) {
  simulator::ScenarioOptions opt;
  opt.initial_soc_pct = sys.initial_soc_pct;
  opt.record_setpoints = false;
  opt.eps_pct_per_h = sys.eps_pct_per_h;
  const auto run = simulator::run_scenario(sys.pv_potential, sys.load, spec, sys.forecasts, sys.site, opt);
  return compute_kpis(run, sys.site);
}

SweepResult sweep_soc_low_limit(const std::vector<SystemInputs>& systems,
                                const std::vector<double>& limits_in) {
  std::vector<double> limits(limits_in);
  std::sort(limits.begin(), limits.end());
  SweepResult res;
  for (const auto& sys : systems)
    res.baseline.push_back({sys.id, run_kpis(sys, simulator::StrategySpec::greedy())});
  for (double limit : limits)
    for (const auto& sys : systems) {
      const auto params = strategy::StrategyParams::for_site(sys.site, limit);
      res.rows.push_back({limit, sys.id, run_kpis(sys, simulator::StrategySpec::forecast(params))});
    }
  return res;
}

void emit_report(const SweepResult& result, ReportFormat format, std::ostream& out,
                 const ReportMeta& meta) {
  if (result.rows.empty()) throw Error(ErrorCode::EmptySpan, "refusing to write an empty sweep");
  if (format == ReportFormat::Csv) {
    out << kSweepCsvHeader << '\n';
    for (const auto& r : result.rows) {
      const auto& k = r.kpi;
      out << num(r.soc_low_limit_pct) << ',' << r.system_id << ',' << num(k.avg_soc_pct) << ','
          << num(k.full_charge_hours_per_day) << ',' << num(k.outage_hours) << ','
          << num(k.pv_generation_wh) << ',' << num(k.consumption_wh) << ','
          << num(k.avg_system_efficiency) << ',' << num(k.direct_consumption_rate) << ','
          << num(k.capacity_factor) << ',' << num(k.soc_ci_lo) << ',' << num(k.soc_ci_hi) << '\n';
    }
    return;
  }
  nlohmann::json j;
  j["config_hash"] = meta.config_hash;
  j["seed"] = meta.seed;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : result.rows)
    j["rows"].push_back({{"soc_low_limit_pct", r.soc_low_limit_pct},
                         {"system_id", r.system_id},
                         {"kpi", kpi_json(r.kpi)}});
  j["baseline"] = nlohmann::json::array();
  for (const auto& b : result.baseline)
    j["baseline"].push_back({{"system_id", b.system_id}, {"kpi", kpi_json(b.kpi)}});
  out << j.dump(2) << '\n';
}

void emit_report(const SweepResult& result, ReportFormat format, const std::filesystem::path& path,
                 const ReportMeta& meta) {
  if (result.rows.empty()) throw Error(ErrorCode::EmptySpan, "refusing to write an empty sweep");
  auto out = create(path);
  emit_report(result, format, out, meta);
}

SweepResult parse_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyFile, "sweep CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) throw MalformedRowError(1, "unexpected sweep CSV header");
  SweepResult res;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 12) throw MalformedRowError(line_no, "expected 12 fields");
    SweepRow r;
    r.soc_low_limit_pct = parse_num(f[0], line_no);
    r.system_id = f[1];
    auto& k = r.kpi;
    k.avg_soc_pct = parse_num(f[2], line_no);
    k.full_charge_hours_per_day = parse_num(f[3], line_no);
    k.outage_hours = parse_num(f[4], line_no);
    k.pv_generation_wh = parse_num(f[5], line_no);
    k.consumption_wh = parse_num(f[6], line_no);
    k.avg_system_efficiency = parse_num(f[7], line_no);
    k.direct_consumption_rate = parse_num(f[8], line_no);
    k.capacity_factor = parse_num(f[9], line_no);
    k.soc_ci_lo = parse_num(f[10], line_no);
    k.soc_ci_hi = parse_num(f[11], line_no);
    res.rows.push_back(std::move(r));
  }
  return res;
}

SweepResult parse_report_json(std::istream& in, ReportMeta* meta) {
  try {
    const auto j = nlohmann::json::parse(in);
    SweepResult res;
    for (const auto& r : j.at("rows"))
      res.rows.push_back({r.at("soc_low_limit_pct").get<double>(),
                          r.at("system_id").get<std::string>(), kpi_from_json(r.at("kpi"))});
    for (const auto& b : j.at("baseline"))
      res.baseline.push_back({b.at("system_id").get<std::string>(), kpi_from_json(b.at("kpi"))});
    if (meta) {
      meta->config_hash = j.at("config_hash").get<std::string>();
      meta->seed = j.at("seed").get<std::uint64_t>();
    }
    return res;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRow, std::string("report JSON: ") + e.what());
  }
}

std::vector<FanChartRow> fan_chart(const HourlyTimeSeries& series, int day_offset_h) {
  if (series.empty()) throw Error(ErrorCode::EmptySpan, "fan chart of an empty series");
  std::array<std::vector<double>, 24> by_hour;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const int h = hour_of_day(series.time_at(i) + std::chrono::hours(day_offset_h));
    by_hour[h].push_back(series[i]);
  }
  std::vector<FanChartRow> rows;
  for (int h = 0; h < 24; ++h) {
    auto& v = by_hour[h];
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    rows.push_back({h, percentile_sorted(v, 0.05), percentile_sorted(v, 0.25),
                    percentile_sorted(v, 0.50), percentile_sorted(v, 0.75),
                    percentile_sorted(v, 0.95)});
  }
  return rows;
}

void write_fan_chart_csv(const std::filesystem::path& path, const std::vector<FanChartRow>& rows) {
  auto out = create(path);
  out << "hour,p5,p25,p50,p75,p95\n";
  for (const auto& r : rows)
    out << r.hour << ',' << num(r.p5) << ',' << num(r.p25) << ',' << num(r.p50) << ','
        << num(r.p75) << ',' << num(r.p95) << '\n';
}

std::vector<std::filesystem::path> emit_plot_data(const SweepResult& result,
                                                  const std::filesystem::path& dir) {
  if (result.rows.empty()) throw Error(ErrorCode::EmptySpan, "no sweep rows to plot");
  std::filesystem::create_directories(dir);
  struct Figure {
    const char* file;
    double KpiReport::*field;
  };
  const Figure figures[] = {{"outages_by_limit.csv", &KpiReport::outage_hours},
                            {"avg_soc_by_limit.csv", &KpiReport::avg_soc_pct},
                            {"full_charge_by_limit.csv", &KpiReport::full_charge_hours_per_day}};
  std::vector<std::filesystem::path> written;
  for (const auto& fig : figures) {
    const auto path = dir / fig.file;
    auto out = create(path);
    out << "limit,system_id,value\n";
    for (const auto& r : result.rows)
      out << num(r.soc_low_limit_pct) << ',' << r.system_id << ',' << num(r.kpi.*fig.field) << '\n';
    written.push_back(path);
  }
  const auto path = dir / "baseline.csv";
  auto out = create(path);
  out << "system_id,outage_h,avg_soc_pct,full_charge_h_per_day\n";
  for (const auto& b : result.baseline)
    out << b.system_id << ',' << num(b.kpi.outage_hours) << ',' << num(b.kpi.avg_soc_pct) << ','
        << num(b.kpi.full_charge_hours_per_day) << '\n';
  written.push_back(path);
  return written;
}

}  // namespace pvsoc::analysis
