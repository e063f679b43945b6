#pragma once

// Data-parallel arithmetic kernels.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is picked once at runtime from CPUID; set the
// environment variable PVSOC_FORCE_SCALAR=1 or call set_isa() to override.
// Reductions may differ from the scalar path by rounding (different
// summation order); elementwise kernels are bit-identical.

#include <cstddef>
#include <span>

namespace pvsoc::kernels {

enum class Isa { Scalar, Avx2 };

/// ISA currently used by the dispatching entry points.
Isa active_isa();
/// True when the CPU and the build both support `isa`.
bool isa_available(Isa isa);
/// Forces an ISA; throws InvalidArgument when unavailable.
void set_isa(Isa isa);
const char* isa_name(Isa isa);

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
/// sum (x_i - c)^2
double sum_sq_dev(std::span<const double> x, double c);
/// sum |x_i - c|
double sum_abs_dev(std::span<const double> x, double c);
/// out_i = 100 * (pv_i * eta - cons_i) / e_batt
void delta_soc_batch(std::span<const double> pv, std::span<const double> cons, double eta,
                     double e_batt, std::span<double> out);

namespace scalar {
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double sum_sq_dev(std::span<const double> x, double c);
double sum_abs_dev(std::span<const double> x, double c);
void delta_soc_batch(std::span<const double> pv, std::span<const double> cons, double eta,
                     double e_batt, std::span<double> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define PVSOC_HAVE_AVX2_KERNELS 1
namespace avx2 {
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double sum_sq_dev(std::span<const double> x, double c);
double sum_abs_dev(std::span<const double> x, double c);
void delta_soc_batch(std::span<const double> pv, std::span<const double> cons, double eta,
                     double e_batt, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace pvsoc::kernels
