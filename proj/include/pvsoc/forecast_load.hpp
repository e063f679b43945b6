#pragma once

// Day-ahead consumption forecast.
//
// Level 1: k-means on daily total energy, k chosen by mean silhouette.
// Level 2: every weekday is assigned to the cluster holding most of its
// historical instances. The days of a weekday group are concatenated, the
// hour-of-day mean and spread are removed, and an ARIMA model forecasts the
// standardized remainder.

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "pvsoc/core_model.hpp"
#include "pvsoc/energy_forecast.hpp"

namespace pvsoc::forecast_load {

// ---------------------------------------------------------------- clustering

struct KMeansResult {
  std::vector<double> centroids;  // ascending
  std::vector<int> labels;        // index into centroids
  double inertia = 0.0;
};

/// Lloyd's algorithm on scalar data with k-means++ seeding, best of `restarts`.
/// Clusters are relabelled in ascending centroid order.
KMeansResult kmeans_1d(std::span<const double> values, int k, int restarts, std::uint64_t seed);

/// Mean silhouette score for a labelling of scalar data. Points in singleton
/// clusters score 0.
double mean_silhouette_1d(std::span<const double> values, std::span<const int> labels, int k);

struct ClusterModel {
  int k = 1;
  std::vector<double> centroids;                   // Wh per day
  std::array<int, 7> weekday_to_cluster{};         // Monday = 0
  std::vector<std::vector<UtcDay>> member_days;    // per cluster
  std::vector<double> silhouette_by_k;             // index k - 2, for k = 2..k_tried
};

struct ClusterSettings {
  int k_max = 7;
  int restarts = 10;
  std::uint64_t seed = 42;
  /// Hours added to UTC to get the local calendar day.
  int day_offset_h = 0;
};

/// Daily totals of complete local days in `history` (EnergyWh).
std::vector<std::pair<UtcDay, double>> daily_totals(const HourlyTimeSeries& history,
                                                    int day_offset_h);

/// Needs at least 14 complete days; throws InsufficientHistory otherwise.
ClusterModel cluster_days(const HourlyTimeSeries& history, const ClusterSettings& settings);

// --------------------------------------------------------------------- ARIMA

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;
  bool operator==(const ArimaOrder&) const = default;
};

/// p, q in {0, 1, 2}, d in {0, 1}.
std::vector<ArimaOrder> default_order_grid();

/// (1 - sum phi_i B^i)(1 - B)^d (y_t - mu [d = 0]) = (1 + sum theta_j B^j) e_t
struct ArimaModel {
  ArimaOrder order;
  std::vector<double> ar_coeffs;
  std::vector<double> ma_coeffs;
  double intercept = 0.0;  // process mean for d = 0, unused otherwise
  double residual_std = 0.0;
};

struct ArimaFit {
  ArimaModel model;
  double aic = 0.0;
  bool converged = true;
};

/// True when all roots of 1 - sum c_i z^i lie outside the unit circle.
bool roots_outside_unit_circle(std::span<const double> coeffs);

/// Conditional least squares per order, selection by AIC. Needs at least
/// `min_samples` observations (InsufficientHistory otherwise). When no order
/// converges the best one is returned with converged = false.
ArimaFit fit_arima(std::span<const double> series, const std::vector<ArimaOrder>& grid,
                   std::size_t min_samples = 7 * 24);

struct ArimaPrediction {
  std::vector<double> mean;
  /// Row-major steps x steps covariance of the forecast errors.
  std::vector<double> cov;
  std::vector<double> std_dev() const;
};

/// h-step forecasts after the end of `history`, with the psi-weight error
/// covariance. An empty history starts from the process mean.
ArimaPrediction arima_forecast(const ArimaModel& model, std::span<const double> history,
                               std::size_t steps);

/// psi_0 .. psi_{n-1} of the ARIMA model including the differencing.
std::vector<double> psi_weights(const ArimaModel& model, std::size_t n);

// ---------------------------------------------------------------- forecaster

struct ClusterArima {
  std::array<double, 24> hour_mean{};
  std::array<double, 24> hour_scale{};
  ArimaModel arima;
  bool converged = true;
};

struct LoadForecastSettings {
  ClusterSettings clustering;
  std::vector<ArimaOrder> order_grid = default_order_grid();
  double z = 1.96;
  /// Most recent cluster days used to initialise the filter state.
  int filter_window_days = 28;
};

class LoadForecaster {
 public:
  LoadForecaster() = default;
  LoadForecaster(ClusterModel clusters, std::vector<ClusterArima> models,
                 LoadForecastSettings settings);

  static LoadForecaster fit(const HourlyTimeSeries& history, const LoadForecastSettings& settings);

  bool fitted() const { return !models_.empty(); }
  const ClusterModel& clusters() const { return clusters_; }
  const std::vector<ClusterArima>& models() const { return models_; }
  const LoadForecastSettings& settings() const { return settings_; }

  /// 24 hourly triplets for local day `target`, using only history before
  /// local day `cutoff` (cutoff <= target). Throws UnfittedModel.
  LoadForecast forecast_day(const HourlyTimeSeries& history, UtcDay target, UtcDay cutoff) const;

  /// Day-ahead forecast: data up to the start of `target`.
  LoadForecast forecast_load_24h(const HourlyTimeSeries& history, UtcDay target) const {
    return forecast_day(history, target, target);
  }

  nlohmann::json to_json() const;
  static LoadForecaster from_json(const nlohmann::json& j);

 private:
  ClusterModel clusters_;
  std::vector<ClusterArima> models_;
  LoadForecastSettings settings_;
};

}  // namespace pvsoc::forecast_load
