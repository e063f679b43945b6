// Compiled with -mavx2; only reached after a CPUID check.

#include <immintrin.h>

#include <cmath>

#include "pvsoc/kernels.hpp"

namespace pvsoc::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double sum(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(p + i + 4));
  }
  for (; i + 4 <= n; i += 4) a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += p[i];
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double* px = x.data();
  const double* py = y.data();
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_mul_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i)));
    a1 = _mm256_add_pd(a1,
                       _mm256_mul_pd(_mm256_loadu_pd(px + i + 4), _mm256_loadu_pd(py + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    a0 = _mm256_add_pd(a0, _mm256_mul_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i)));
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += px[i] * py[i];
  return acc;
}

double sum_sq_dev(std::span<const double> x, double c) {
  const std::size_t n = x.size();
  const double* p = x.data();
  const __m256d vc = _mm256_set1_pd(c);
  __m256d a0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), vc);
    a0 = _mm256_add_pd(a0, _mm256_mul_pd(d, d));
  }
  double acc = hsum(a0);
  for (; i < n; ++i) {
    const double d = p[i] - c;
    acc += d * d;
  }
  return acc;
}

double sum_abs_dev(std::span<const double> x, double c) {
  const std::size_t n = x.size();
  const double* p = x.data();
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d a0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), vc);
    a0 = _mm256_add_pd(a0, _mm256_andnot_pd(sign, d));
  }
  double acc = hsum(a0);
  for (; i < n; ++i) acc += std::fabs(p[i] - c);
  return acc;
}

void delta_soc_batch(std::span<const double> pv, std::span<const double> cons, double eta,
                     double e_batt, std::span<double> out) {
  const std::size_t n = out.size();
  const double scale = 100.0 / e_batt;
  const __m256d veta = _mm256_set1_pd(eta);
  const __m256d vscale = _mm256_set1_pd(scale);
  std::size_t i = 0;
  // mul/sub kept separate (no FMA) so results match the scalar path bit for bit
  for (; i + 4 <= n; i += 4) {
    const __m256d e = _mm256_mul_pd(_mm256_loadu_pd(pv.data() + i), veta);
    const __m256d d = _mm256_sub_pd(e, _mm256_loadu_pd(cons.data() + i));
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(d, vscale));
  }
  for (; i < n; ++i) out[i] = (pv[i] * eta - cons[i]) * scale;
}

}  // namespace pvsoc::kernels::avx2
