#pragma once

#include <cstddef>
#include <vector>

#include "pvsoc/core_model.hpp"

namespace pvsoc {

/// Hourly (low, exp, up) energy forecast over a horizon starting at `start`.
///
/// Interval energies over several hours come from `interval()`. When
/// `error_cov` is empty the hourly errors are treated as fully dependent and
/// the bounds simply add up. Otherwise `error_cov` is the row-major n x n
/// covariance of the hourly forecast errors (Wh^2) and the interval bound is
/// exp -/+ z * sqrt(1' C 1), floored at zero.
struct EnergyForecast {
  UtcHour start{};
  std::vector<EnergyTriplet> hourly;
  std::vector<double> error_cov;
  double z = 1.96;

  std::size_t size() const { return hourly.size(); }

  /// Interval energy for hours [first, last).
  EnergyTriplet interval(std::size_t first, std::size_t last) const;

  std::vector<double> expected() const;

  /// Hours [first, last) as a standalone forecast.
  EnergyForecast slice(std::size_t first, std::size_t last) const;

  /// Concatenation; cross-covariance between the two parts is zero.
  static EnergyForecast join(const EnergyForecast& a, const EnergyForecast& b);

  /// Zero-width forecast equal to `values`.
  static EnergyForecast exact(UtcHour start, std::vector<double> values);

  /// Throws InvariantBreach unless 0 <= low <= exp <= up in every hour.
  void check_ordered() const;
};

/// Constant-time interval queries over one forecast (prefix sums of the
/// hourly bounds and of the error covariance).
class IntervalIndex {
 public:
  explicit IntervalIndex(const EnergyForecast& f);
  /// Same result as EnergyForecast::interval up to rounding.
  EnergyTriplet interval(std::size_t first, std::size_t last) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  double z_ = 1.96;
  bool comonotone_ = true;
  std::vector<double> low_, exp_, up_;  // n + 1 prefix sums
  std::vector<double> cov_;             // (n + 1)^2 2-D prefix sums
};

using LoadForecast = EnergyForecast;
using PvForecast = EnergyForecast;

/// Both forecasts over the same horizon.
struct ForecastPair {
  LoadForecast load;
  PvForecast pv;
};

}  // namespace pvsoc
