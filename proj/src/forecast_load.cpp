#include "pvsoc/forecast_load.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "nelder_mead.hpp"
#include "pvsoc/kernels.hpp"

namespace pvsoc::forecast_load {

namespace {

constexpr double kScaleFloor = 1e-9;

UtcHour local_day_start(UtcDay day, int offset_h) {
  return UtcHour{day} - std::chrono::hours(offset_h);
}

// Indices of the 24 hours of a local day inside `history`, or nullopt when
// the day is not fully covered.
std::optional<std::size_t> day_begin_index(const HourlyTimeSeries& history, UtcDay day,
                                           int offset_h) {
  const auto first = history.index_of(local_day_start(day, offset_h));
  if (!first || *first + 24 > history.size()) return std::nullopt;
  return first;
}

std::vector<UtcDay> complete_days(const HourlyTimeSeries& history, int offset_h) {
  std::vector<UtcDay> days;
  if (history.empty()) return days;
  const UtcDay first = std::chrono::floor<std::chrono::days>(history.start +
                                                             std::chrono::hours(offset_h));
  const UtcDay last = std::chrono::floor<std::chrono::days>(history.end() +
                                                            std::chrono::hours(offset_h));
  for (UtcDay d = first; d <= last; d += std::chrono::days(1))
    if (day_begin_index(history, d, offset_h)) days.push_back(d);
  return days;
}

std::vector<double> difference(std::span<const double> x, int d) {
  std::vector<double> w(x.begin(), x.end());
  for (int k = 0; k < d; ++k) {
    if (w.size() <= 1) return {};
    for (std::size_t i = 0; i + 1 < w.size(); ++i) w[i] = w[i + 1] - w[i];
    w.pop_back();
  }
  return w;
}

// One-step residuals of an ARMA recursion on `w` (already differenced),
// conditional on zero pre-sample innovations. Residuals before `t0` are 0.
void arma_residuals(std::span<const double> w, double mu, std::span<const double> phi,
                    std::span<const double> theta, std::size_t t0, std::vector<double>& e) {
  const std::size_t n = w.size();
  e.assign(n, 0.0);
  for (std::size_t t = t0; t < n; ++t) {
    double v = w[t] - mu;
    for (std::size_t i = 0; i < phi.size(); ++i)
      if (t >= i + 1) v -= phi[i] * (w[t - i - 1] - mu);
    for (std::size_t j = 0; j < theta.size(); ++j)
      if (t >= j + 1) v -= theta[j] * e[t - j - 1];
    e[t] = v;
  }
}

}  // namespace

// ---------------------------------------------------------------- clustering

KMeansResult kmeans_1d(std::span<const double> values, int k, int restarts, std::uint64_t seed) {
  const std::size_t n = values.size();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw Error(ErrorCode::InvalidArgument, "kmeans_1d: k must be in [1, n]");

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r) * 0x9E3779B97F4A7C15ULL);
    // k-means++ seeding
    std::vector<double> c;
    c.push_back(values[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> d2(n);
    while (static_cast<int>(c.size()) < k) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (double cc : c) m = std::min(m, (values[i] - cc) * (values[i] - cc));
        d2[i] = m;
        total += m;
      }
      if (total <= 0.0) {
        c.push_back(values[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
        continue;
      }
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      std::size_t pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        u -= d2[i];
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
      c.push_back(values[pick]);
    }

    std::vector<int> labels(n, -1);
    for (int iter = 0; iter < 300; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        int arg = 0;
        double m = std::fabs(values[i] - c[0]);
        for (int j = 1; j < k; ++j) {
          const double dj = std::fabs(values[i] - c[j]);
          if (dj < m) {
            m = dj;
            arg = j;
          }
        }
        if (labels[i] != arg) {
          labels[i] = arg;
          changed = true;
        }
      }
      std::vector<double> sum(k, 0.0);
      std::vector<std::size_t> cnt(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        sum[labels[i]] += values[i];
        ++cnt[labels[i]];
      }
      for (int j = 0; j < k; ++j) {
        if (cnt[j] > 0) {
          c[j] = sum[j] / double(cnt[j]);
        } else {
          // empty cluster: move it to the point farthest from its centroid
          std::size_t far = 0;
          double fd = -1.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double dd = std::fabs(values[i] - c[labels[i]]);
            if (dd > fd) {
              fd = dd;
              far = i;
            }
          }
          c[j] = values[far];
          changed = true;
        }
      }
      if (!changed) break;
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += (values[i] - c[labels[i]]) * (values[i] - c[labels[i]]);
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.centroids = c;
      best.labels = labels;
    }
  }

  // ascending centroid order
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return best.centroids[a] < best.centroids[b]; });
  std::vector<int> rank(k);
  std::vector<double> sorted(k);
  for (int j = 0; j < k; ++j) {
    rank[order[j]] = j;
    sorted[j] = best.centroids[order[j]];
  }
  for (auto& l : best.labels) l = rank[l];
  best.centroids = std::move(sorted);
  return best;
}

double mean_silhouette_1d(std::span<const double> values, std::span<const int> labels, int k) {
  const std::size_t n = values.size();
  std::vector<std::vector<double>> groups(k);
  for (std::size_t i = 0; i < n; ++i) groups[labels[i]].push_back(values[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int own = labels[i];
    const auto& g = groups[own];
    if (g.size() <= 1) continue;  // singleton scores 0
    const double a = kernels::sum_abs_dev(g, values[i]) / double(g.size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      if (j == own || groups[j].empty()) continue;
      b = std::min(b, kernels::sum_abs_dev(groups[j], values[i]) / double(groups[j].size()));
    }
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / double(n);
}

std::vector<std::pair<UtcDay, double>> daily_totals(const HourlyTimeSeries& history,
                                                    int day_offset_h) {
  std::vector<std::pair<UtcDay, double>> out;
  for (UtcDay d : complete_days(history, day_offset_h)) {
    const auto i = *day_begin_index(history, d, day_offset_h);
    out.emplace_back(d, kernels::sum(std::span(history.values).subspan(i, 24)));
  }
  return out;
}

ClusterModel cluster_days(const HourlyTimeSeries& history, const ClusterSettings& settings) {
  const auto totals = daily_totals(history, settings.day_offset_h);
  if (totals.size() < 14)
    throw Error(ErrorCode::InsufficientHistory,
                "clustering needs at least 14 complete days, got " + std::to_string(totals.size()));

  std::vector<double> x;
  x.reserve(totals.size());
  for (const auto& [day, v] : totals) x.push_back(v);

  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  std::vector<double> distinct(x);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  ClusterModel model;
  KMeansResult chosen;
  if (*mx - *mn <= 1e-9 * std::max(1.0, std::fabs(*mx))) {
    chosen.centroids = {kernels::sum(x) / double(x.size())};
    chosen.labels.assign(x.size(), 0);
  } else {
    const int k_hi = std::min({settings.k_max, 7, static_cast<int>(distinct.size()),
                               static_cast<int>(x.size()) - 1});
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= k_hi; ++k) {
      auto km = kmeans_1d(x, k, settings.restarts, settings.seed);
      const double s = mean_silhouette_1d(x, km.labels, k);
      model.silhouette_by_k.push_back(s);
      if (s > best_score) {  // strict: ties keep the smaller k
        best_score = s;
        chosen = std::move(km);
      }
    }
    if (chosen.centroids.empty()) {
      chosen.centroids = {kernels::sum(x) / double(x.size())};
      chosen.labels.assign(x.size(), 0);
    }
  }

  model.k = static_cast<int>(chosen.centroids.size());
  model.centroids = chosen.centroids;
  model.member_days.assign(model.k, {});
  std::array<std::vector<int>, 7> votes;
  for (auto& v : votes) v.assign(model.k, 0);
  for (std::size_t i = 0; i < totals.size(); ++i) {
    model.member_days[chosen.labels[i]].push_back(totals[i].first);
    ++votes[weekday_index(totals[i].first)][chosen.labels[i]];
  }
  for (int w = 0; w < 7; ++w) {
    const auto& v = votes[w];
    model.weekday_to_cluster[w] =
        static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());  // first max wins
  }
  return model;
}

// --------------------------------------------------------------------- ARIMA

std::vector<ArimaOrder> default_order_grid() {
  std::vector<ArimaOrder> g;
  for (int d = 0; d <= 1; ++d)
    for (int p = 0; p <= 2; ++p)
      for (int q = 0; q <= 2; ++q) g.push_back({p, d, q});
  return g;
}

bool roots_outside_unit_circle(std::span<const double> coeffs) {
  // Step-down recursion: the reflection coefficients of an AR polynomial
  // all lie strictly inside (-1, 1) iff the polynomial is stable.
  std::vector<double> a(coeffs.begin(), coeffs.end());
  while (!a.empty() && a.back() == 0.0) a.pop_back();
  for (std::size_t m = a.size(); m >= 1; --m) {
    const double k = a[m - 1];
    if (!(std::fabs(k) < 1.0)) return false;
    const double denom = 1.0 - k * k;
    std::vector<double> next(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) next[i] = (a[i] + k * a[m - 2 - i]) / denom;
    a = std::move(next);
  }
  return true;
}

ArimaFit fit_arima(std::span<const double> series, const std::vector<ArimaOrder>& grid,
                   std::size_t min_samples) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "fit_arima: empty order grid");
  if (series.size() < std::max<std::size_t>(min_samples, 3))
    throw Error(ErrorCode::InsufficientHistory,
                "ARIMA fit needs at least " + std::to_string(min_samples) + " samples, got " +
                    std::to_string(series.size()));

  // constant series: exact (0,0,0) fit
  {
    const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
    if (*mx - *mn <= 1e-12 * std::max(1.0, std::fabs(*mx))) {
      ArimaFit fit;
      fit.model.order = {0, 0, 0};
      fit.model.intercept = *mn;
      fit.model.residual_std = 0.0;
      fit.aic = -std::numeric_limits<double>::infinity();
      return fit;
    }
  }

  std::map<int, int> t0_by_d;
  for (const auto& o : grid) {
    if (o.p < 0 || o.d < 0 || o.q < 0)
      throw Error(ErrorCode::InvalidArgument, "fit_arima: negative order");
    t0_by_d[o.d] = std::max(t0_by_d[o.d], o.p);
  }

  ArimaFit best;
  best.aic = std::numeric_limits<double>::infinity();
  bool have_best = false;
  bool best_converged = false;

  for (const auto& order : grid) {
    const auto w = difference(series, order.d);
    const std::size_t t0 = static_cast<std::size_t>(t0_by_d[order.d]);
    if (w.size() < t0 + 2 + static_cast<std::size_t>(order.p + order.q)) continue;

    const double center =
        order.d == 0 ? kernels::sum(std::span<const double>(w)) / double(w.size()) : 0.0;
    const double scale = std::sqrt(kernels::sum_sq_dev(w, center) / double(w.size()));
    std::vector<double> ws(w.size());
    const double inv = scale > 0.0 ? 1.0 / scale : 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) ws[i] = (w[i] - center) * inv;

    const int p = order.p;
    const int q = order.q;
    const bool has_mean = order.d == 0;
    const std::size_t m = ws.size() - t0;
    std::vector<double> e;
    std::vector<double> phi(p), theta(q), neg_theta(q);

    auto css = [&](const std::vector<double>& x) {
      for (int i = 0; i < p; ++i) phi[i] = x[i];
      for (int j = 0; j < q; ++j) {
        theta[j] = x[p + j];
        neg_theta[j] = -theta[j];
      }
      if (!roots_outside_unit_circle(phi) || !roots_outside_unit_circle(neg_theta))
        return std::numeric_limits<double>::infinity();
      const double mu = has_mean ? x[p + q] : 0.0;
      arma_residuals(ws, mu, phi, theta, t0, e);
      return kernels::sum_sq_dev(std::span<const double>(e).subspan(t0), 0.0);
    };

    std::vector<double> x0(p + q + (has_mean ? 1 : 0), 0.0);
    if (p >= 1 && ws.size() > 1) {
      // lag-1 autocorrelation as the AR starting point
      const double r1 = kernels::dot(std::span<const double>(ws).subspan(1),
                                     std::span<const double>(ws).first(ws.size() - 1)) /
                        std::max(kernels::sum_sq_dev(ws, 0.0), 1e-300);
      x0[0] = std::clamp(r1, -0.9, 0.9);
    }
    const auto nm = detail::nelder_mead(css, x0, 0.1, 600 * static_cast<int>(x0.size() + 1));
    if (!std::isfinite(nm.f) || nm.f >= std::numeric_limits<double>::max()) continue;

    const double sse = std::max(nm.f, 1e-300);
    const int k_params = p + q + (has_mean ? 1 : 0) + 1;
    const double aic = double(m) * std::log(sse / double(m)) + 2.0 * k_params;
    // converged fits always beat non-converged ones
    const bool better = !have_best || (nm.converged && !best_converged) ||
                        (nm.converged == best_converged && aic < best.aic);
    if (!better) continue;

    ArimaModel model;
    model.order = order;
    model.ar_coeffs.assign(nm.x.begin(), nm.x.begin() + p);
    model.ma_coeffs.assign(nm.x.begin() + p, nm.x.begin() + p + q);
    model.intercept = has_mean ? center + scale * nm.x[p + q] : 0.0;
    model.residual_std = scale * std::sqrt(nm.f / double(m));
    best.model = std::move(model);
    best.aic = aic;
    best.converged = nm.converged;
    best_converged = nm.converged;
    have_best = true;
  }
  if (!have_best)
    throw Error(ErrorCode::InsufficientHistory, "no ARIMA order in the grid could be fitted");
  return best;
}

std::vector<double> psi_weights(const ArimaModel& model, std::size_t n) {
  // phi*(B) = phi(B) (1 - B)^d written as 1 - sum a_i B^i
  std::vector<double> poly{1.0};
  for (double c : model.ar_coeffs) poly.push_back(-c);
  for (int k = 0; k < model.order.d; ++k) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i];
    }
    poly = std::move(next);
  }
  std::vector<double> psi(n, 0.0);
  if (n == 0) return psi;
  psi[0] = 1.0;
  for (std::size_t j = 1; j < n; ++j) {
    double v = j <= model.ma_coeffs.size() ? model.ma_coeffs[j - 1] : 0.0;
    for (std::size_t i = 1; i < poly.size() && i <= j; ++i) v += -poly[i] * psi[j - i];
    psi[j] = v;
  }
  return psi;
}

std::vector<double> ArimaPrediction::std_dev() const {
  const std::size_t n = mean.size();
  std::vector<double> sd(n);
  for (std::size_t i = 0; i < n; ++i) sd[i] = std::sqrt(std::max(cov[i * n + i], 0.0));
  return sd;
}

ArimaPrediction arima_forecast(const ArimaModel& model, std::span<const double> history,
                               std::size_t steps) {
  const int d = model.order.d;
  const auto& phi = model.ar_coeffs;
  const auto& theta = model.ma_coeffs;
  const double mu = d == 0 ? model.intercept : 0.0;

  // last value of each differencing level, for re-integration
  std::vector<double> lasts(d, 0.0);
  {
    std::vector<double> lvl(history.begin(), history.end());
    for (int k = 0; k < d; ++k) {
      if (!lvl.empty()) lasts[k] = lvl.back();
      lvl = difference(lvl, 1);
    }
  }
  const auto w = difference(history, d);
  std::vector<double> e;
  arma_residuals(w, mu, phi, theta, std::min<std::size_t>(phi.size(), w.size()), e);

  const std::size_t n = w.size();
  std::vector<double> ext(w);
  ext.resize(n + steps, 0.0);
  for (std::size_t h = 0; h < steps; ++h) {
    const std::size_t t = n + h;
    double v = mu;
    for (std::size_t i = 0; i < phi.size(); ++i)
      v += phi[i] * ((t >= i + 1 ? ext[t - i - 1] : mu) - mu);
    for (std::size_t j = 0; j < theta.size(); ++j)
      if (t >= j + 1 && t - j - 1 < n) v += theta[j] * e[t - j - 1];
    ext[t] = v;
  }
  std::vector<double> f(ext.begin() + static_cast<std::ptrdiff_t>(n), ext.end());
  for (int k = d - 1; k >= 0; --k) {
    double cur = lasts[k];
    for (auto& v : f) {
      cur += v;
      v = cur;
    }
  }

  ArimaPrediction pred;
  pred.mean = std::move(f);
  const auto psi = psi_weights(model, steps);
  const double s2 = model.residual_std * model.residual_std;
  pred.cov.assign(steps * steps, 0.0);
  // cov(h, h + L) = s2 * sum_{j <= h} psi_j psi_{j + L}, accumulated along each diagonal
  for (std::size_t lag = 0; lag < steps; ++lag) {
    double acc = 0.0;
    for (std::size_t h = 0; h + lag < steps; ++h) {
      acc += psi[h] * psi[h + lag];
      pred.cov[h * steps + h + lag] = pred.cov[(h + lag) * steps + h] = s2 * acc;
    }
  }
  return pred;
}

// ---------------------------------------------------------------- forecaster

LoadForecaster::LoadForecaster(ClusterModel clusters, std::vector<ClusterArima> models,
                               LoadForecastSettings settings)
    : clusters_(std::move(clusters)), models_(std::move(models)), settings_(std::move(settings)) {
  if (static_cast<int>(models_.size()) != clusters_.k)
    throw Error(ErrorCode::InvalidArgument, "one ARIMA model per cluster required");
}

LoadForecaster LoadForecaster::fit(const HourlyTimeSeries& history,
                                   const LoadForecastSettings& settings) {
  const int off = settings.clustering.day_offset_h;
  auto clusters = cluster_days(history, settings.clustering);
  const auto days = complete_days(history, off);

  std::vector<ClusterArima> models(clusters.k);
  for (int c = 0; c < clusters.k; ++c) {
    std::vector<UtcDay> sel;
    for (UtcDay d : days)
      if (clusters.weekday_to_cluster[weekday_index(d)] == c) sel.push_back(d);
    if (sel.empty()) sel = clusters.member_days[c];  // cluster with no weekday of its own

    auto& m = models[c];
    for (int h = 0; h < 24; ++h) {
      double s = 0.0, s2 = 0.0;
      for (UtcDay d : sel) {
        const double v = history[*day_begin_index(history, d, off) + h];
        s += v;
        s2 += v * v;
      }
      const double mean = s / double(sel.size());
      m.hour_mean[h] = mean;
      m.hour_scale[h] = std::sqrt(std::max(s2 / double(sel.size()) - mean * mean, 0.0));
    }
    std::vector<double> zs;
    zs.reserve(sel.size() * 24);
    for (UtcDay d : sel) {
      const auto i = *day_begin_index(history, d, off);
      for (int h = 0; h < 24; ++h)
        zs.push_back(m.hour_scale[h] > kScaleFloor ? (history[i + h] - m.hour_mean[h]) / m.hour_scale[h]
                                                   : 0.0);
    }
    // Fewer than 7 days: profile-only model.
    const bool short_history = sel.size() < 7;
    const auto fit = short_history
                         ? fit_arima(zs, {ArimaOrder{0, 0, 0}}, 1)
                         : fit_arima(zs, settings.order_grid, 7 * 24);
    m.arima = fit.model;
    m.converged = fit.converged;
  }
  return LoadForecaster(std::move(clusters), std::move(models), settings);
}

LoadForecast LoadForecaster::forecast_day(const HourlyTimeSeries& history, UtcDay target,
                                          UtcDay cutoff) const {
  if (!fitted()) throw Error(ErrorCode::UnfittedModel, "load forecaster is not fitted");
  if (cutoff > target) cutoff = target;
  const int off = settings_.clustering.day_offset_h;
  const int c = clusters_.weekday_to_cluster[weekday_index(target)];
  const auto& m = models_[c];

  // observed cluster days before the cutoff, most recent last
  std::vector<std::size_t> starts;
  const int window = std::max(1, settings_.filter_window_days);
  for (UtcDay d = cutoff - std::chrono::days(1);
       static_cast<int>(starts.size()) < window && UtcHour{d} + std::chrono::hours(24) > history.start;
       d -= std::chrono::days(1)) {
    if (clusters_.weekday_to_cluster[weekday_index(d)] != c) continue;
    if (auto i = day_begin_index(history, d, off)) starts.push_back(*i);
  }
  std::reverse(starts.begin(), starts.end());
  std::vector<double> zs;
  zs.reserve(starts.size() * 24);
  for (auto i : starts)
    for (int h = 0; h < 24; ++h)
      zs.push_back(m.hour_scale[h] > kScaleFloor ? (history[i + h] - m.hour_mean[h]) / m.hour_scale[h]
                                                 : 0.0);

  std::size_t gap_days = 0;
  for (UtcDay d = cutoff; d < target; d += std::chrono::days(1))
    if (clusters_.weekday_to_cluster[weekday_index(d)] == c) ++gap_days;
  if (zs.empty()) gap_days += 7;  // no state: start a week out from the process mean

  const std::size_t steps = 24 * (gap_days + 1);
  const auto pred = arima_forecast(m.arima, zs, steps);
  const std::size_t base = steps - 24;

  LoadForecast out;
  out.start = local_day_start(target, off);
  out.z = settings_.z;
  out.hourly.resize(24);
  out.error_cov.assign(24 * 24, 0.0);
  for (int h = 0; h < 24; ++h) {
    for (int k = 0; k < 24; ++k)
      out.error_cov[h * 24 + k] =
          m.hour_scale[h] * m.hour_scale[k] * pred.cov[(base + h) * steps + (base + k)];
    const double raw = m.hour_mean[h] + m.hour_scale[h] * pred.mean[base + h];
    const double half = settings_.z * std::sqrt(std::max(out.error_cov[h * 24 + h], 0.0));
    auto& t = out.hourly[h];
    t.exp = std::max(raw, 0.0);
    t.low = std::clamp(raw - half, 0.0, t.exp);
    t.up = std::max(raw + half, t.exp);
  }
  return out;
}

// ---------------------------------------------------------------------- JSON

nlohmann::json LoadForecaster::to_json() const {
  using nlohmann::json;
  json j;
  j["k"] = clusters_.k;
  j["centroids_wh"] = clusters_.centroids;
  j["weekday_to_cluster"] = clusters_.weekday_to_cluster;
  j["silhouette_by_k"] = clusters_.silhouette_by_k;
  json members = json::array();
  for (const auto& days : clusters_.member_days) {
    json arr = json::array();
    for (UtcDay d : days) arr.push_back(format_date(d));
    members.push_back(arr);
  }
  j["member_days"] = members;
  json models = json::array();
  for (const auto& m : models_) {
    models.push_back({{"order", {m.arima.order.p, m.arima.order.d, m.arima.order.q}},
                      {"ar", m.arima.ar_coeffs},
                      {"ma", m.arima.ma_coeffs},
                      {"intercept", m.arima.intercept},
                      {"residual_std", m.arima.residual_std},
                      {"converged", m.converged},
                      {"hour_mean", m.hour_mean},
                      {"hour_scale", m.hour_scale}});
  }
  j["models"] = models;
  json grid = json::array();
  for (const auto& o : settings_.order_grid) grid.push_back({o.p, o.d, o.q});
  j["settings"] = {{"k_max", settings_.clustering.k_max},
                   {"restarts", settings_.clustering.restarts},
                   {"seed", settings_.clustering.seed},
                   {"day_offset_h", settings_.clustering.day_offset_h},
                   {"order_grid", grid},
                   {"z", settings_.z},
                   {"filter_window_days", settings_.filter_window_days}};
  return j;
}

LoadForecaster LoadForecaster::from_json(const nlohmann::json& j) {
  try {
    LoadForecastSettings s;
    const auto& js = j.at("settings");
    s.clustering.k_max = js.at("k_max").get<int>();
    s.clustering.restarts = js.at("restarts").get<int>();
    s.clustering.seed = js.at("seed").get<std::uint64_t>();
    s.clustering.day_offset_h = js.at("day_offset_h").get<int>();
    s.order_grid.clear();
    for (const auto& o : js.at("order_grid"))
      s.order_grid.push_back({o.at(0).get<int>(), o.at(1).get<int>(), o.at(2).get<int>()});
    s.z = js.at("z").get<double>();
    s.filter_window_days = js.at("filter_window_days").get<int>();

    ClusterModel cm;
    cm.k = j.at("k").get<int>();
    cm.centroids = j.at("centroids_wh").get<std::vector<double>>();
    cm.weekday_to_cluster = j.at("weekday_to_cluster").get<std::array<int, 7>>();
    cm.silhouette_by_k = j.at("silhouette_by_k").get<std::vector<double>>();
    for (const auto& arr : j.at("member_days")) {
      std::vector<UtcDay> days;
      for (const auto& d : arr) {
        auto parsed = parse_date(d.get<std::string>());
        if (!parsed) throw Error(ErrorCode::Config, "bad date in member_days");
        days.push_back(*parsed);
      }
      cm.member_days.push_back(std::move(days));
    }
    std::vector<ClusterArima> models;
    for (const auto& jm : j.at("models")) {
      ClusterArima m;
      const auto& o = jm.at("order");
      m.arima.order = {o.at(0).get<int>(), o.at(1).get<int>(), o.at(2).get<int>()};
      m.arima.ar_coeffs = jm.at("ar").get<std::vector<double>>();
      m.arima.ma_coeffs = jm.at("ma").get<std::vector<double>>();
      m.arima.intercept = jm.at("intercept").get<double>();
      m.arima.residual_std = jm.at("residual_std").get<double>();
      m.converged = jm.at("converged").get<bool>();
      m.hour_mean = jm.at("hour_mean").get<std::array<double, 24>>();
      m.hour_scale = jm.at("hour_scale").get<std::array<double, 24>>();
      models.push_back(m);
    }
    for (int w : cm.weekday_to_cluster)
      if (w < 0 || w >= cm.k) throw Error(ErrorCode::Config, "weekday mapped to unknown cluster");
    return LoadForecaster(std::move(cm), std::move(models), std::move(s));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("load model JSON: ") + e.what());
  }
}

}  // namespace pvsoc::forecast_load
