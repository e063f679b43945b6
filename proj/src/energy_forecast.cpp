#include "pvsoc/energy_forecast.hpp"

#include <algorithm>
#include <cmath>

namespace pvsoc {

EnergyTriplet EnergyForecast::interval(std::size_t first, std::size_t last) const {
  last = std::min(last, hourly.size());
  EnergyTriplet t;
  if (first >= last) return t;
  for (std::size_t i = first; i < last; ++i) t.exp += hourly[i].exp;
  if (error_cov.empty()) {
    for (std::size_t i = first; i < last; ++i) {
      t.low += hourly[i].low;
      t.up += hourly[i].up;
    }
    return t;
  }
  const std::size_t n = hourly.size();
  double var = 0.0;
  for (std::size_t i = first; i < last; ++i)
    for (std::size_t j = first; j < last; ++j) var += error_cov[i * n + j];
  const double half = z * std::sqrt(std::max(var, 0.0));
  t.low = std::max(0.0, t.exp - half);
  t.up = t.exp + half;
  return t;
}

std::vector<double> EnergyForecast::expected() const {
  std::vector<double> out(hourly.size());
  std::transform(hourly.begin(), hourly.end(), out.begin(), [](const auto& h) { return h.exp; });
  return out;
}

EnergyForecast EnergyForecast::slice(std::size_t first, std::size_t last) const {
  last = std::min(last, hourly.size());
  first = std::min(first, last);
  EnergyForecast out;
  out.start = start + std::chrono::hours(first);
  out.z = z;
  out.hourly.assign(hourly.begin() + first, hourly.begin() + last);
  if (!error_cov.empty()) {
    const std::size_t n = hourly.size();
    const std::size_t m = last - first;
    out.error_cov.resize(m * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        out.error_cov[i * m + j] = error_cov[(first + i) * n + (first + j)];
  }
  return out;
}

EnergyForecast EnergyForecast::join(const EnergyForecast& a, const EnergyForecast& b) {
  EnergyForecast out;
  out.start = a.start;
  out.z = a.z;
  out.hourly = a.hourly;
  out.hourly.insert(out.hourly.end(), b.hourly.begin(), b.hourly.end());
  if (!a.error_cov.empty() || !b.error_cov.empty()) {
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    const std::size_t n = na + nb;
    out.error_cov.assign(n * n, 0.0);
    // A part without covariance is treated as independent hours whose
    // half-width is the larger of its two hourly half-widths.
    auto fill = [&](const EnergyForecast& part, std::size_t off) {
      const std::size_t m = part.size();
      for (std::size_t i = 0; i < m; ++i) {
        if (part.error_cov.empty()) {
          const auto& h = part.hourly[i];
          const double sd = std::max(h.exp - h.low, h.up - h.exp) / part.z;
          out.error_cov[(off + i) * n + (off + i)] = sd * sd;
        } else {
          for (std::size_t j = 0; j < m; ++j)
            out.error_cov[(off + i) * n + (off + j)] = part.error_cov[i * m + j];
        }
      }
    };
    fill(a, 0);
    fill(b, na);
  }
  return out;
}

EnergyForecast EnergyForecast::exact(UtcHour start, std::vector<double> values) {
  EnergyForecast out;
  out.start = start;
  out.hourly.reserve(values.size());
  for (double v : values) out.hourly.push_back({v, v, v});
  return out;
}

void EnergyForecast::check_ordered() const {
  for (std::size_t i = 0; i < hourly.size(); ++i) {
    const auto& h = hourly[i];
    if (!(h.low >= 0.0 && h.low <= h.exp && h.exp <= h.up))
      throw Error(ErrorCode::InvariantBreach,
                  "forecast interval out of order at hour " + std::to_string(i));
  }
}

}  // namespace pvsoc

namespace pvsoc {

IntervalIndex::IntervalIndex(const EnergyForecast& f)
    : n_(f.size()), z_(f.z), comonotone_(f.error_cov.empty()) {
  low_.assign(n_ + 1, 0.0);
  exp_.assign(n_ + 1, 0.0);
  up_.assign(n_ + 1, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    low_[i + 1] = low_[i] + f.hourly[i].low;
    exp_[i + 1] = exp_[i] + f.hourly[i].exp;
    up_[i + 1] = up_[i] + f.hourly[i].up;
  }
  if (!comonotone_) {
    const std::size_t m = n_ + 1;
    cov_.assign(m * m, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        cov_[(i + 1) * m + (j + 1)] = f.error_cov[i * n_ + j] + cov_[i * m + (j + 1)] +
                                      cov_[(i + 1) * m + j] - cov_[i * m + j];
  }
}

EnergyTriplet IntervalIndex::interval(std::size_t first, std::size_t last) const {
  last = std::min(last, n_);
  EnergyTriplet t;
  if (first >= last) return t;
  t.exp = exp_[last] - exp_[first];
  if (comonotone_) {
    t.low = low_[last] - low_[first];
    t.up = up_[last] - up_[first];
    return t;
  }
  const std::size_t m = n_ + 1;
  const double var = cov_[last * m + last] - cov_[first * m + last] - cov_[last * m + first] +
                     cov_[first * m + first];
  const double half = z_ * std::sqrt(std::max(var, 0.0));
  t.low = std::max(0.0, t.exp - half);
  t.up = t.exp + half;
  return t;
}

}  // namespace pvsoc
