#include <cmath>

#include "pvsoc/kernels.hpp"

namespace pvsoc::kernels::scalar {

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double sum_sq_dev(std::span<const double> x, double c) {
  double acc = 0.0;
  for (double v : x) {
    const double d = v - c;
    acc += d * d;
  }
  return acc;
}

double sum_abs_dev(std::span<const double> x, double c) {
  double acc = 0.0;
  for (double v : x) acc += std::fabs(v - c);
  return acc;
}

void delta_soc_batch(std::span<const double> pv, std::span<const double> cons, double eta,
                     double e_batt, std::span<double> out) {
  const double scale = 100.0 / e_batt;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (pv[i] * eta - cons[i]) * scale;
}

}  // namespace pvsoc::kernels::scalar
