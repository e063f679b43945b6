#include <atomic>
#include <cstdlib>
#include <cstring>

#include "pvsoc/error.hpp"
#include "pvsoc/kernels.hpp"

namespace pvsoc::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(PVSOC_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  const char* force = std::getenv("PVSOC_FORCE_SCALAR");
  if (force != nullptr && std::strcmp(force, "0") != 0 && force[0] != '\0') return Isa::Scalar;
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return cpu_has_avx2();
  }
  return false;
}

void set_isa(Isa isa) {
  if (!isa_available(isa))
    throw Error(ErrorCode::InvalidArgument, std::string("ISA not available: ") + isa_name(isa));
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

#if defined(PVSOC_HAVE_AVX2_KERNELS)
#define PVSOC_DISPATCH(fn, ...) \
  (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define PVSOC_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double sum(std::span<const double> x) { return PVSOC_DISPATCH(sum, x); }

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "dot: length mismatch");
  return PVSOC_DISPATCH(dot, x, y);
}

double sum_sq_dev(std::span<const double> x, double c) { return PVSOC_DISPATCH(sum_sq_dev, x, c); }

double sum_abs_dev(std::span<const double> x, double c) {
  return PVSOC_DISPATCH(sum_abs_dev, x, c);
}

void delta_soc_batch(std::span<const double> pv, std::span<const double> cons, double eta,
                     double e_batt, std::span<double> out) {
  if (pv.size() != out.size() || cons.size() != out.size())
    throw Error(ErrorCode::InvalidArgument, "delta_soc_batch: length mismatch");
  PVSOC_DISPATCH(delta_soc_batch, pv, cons, eta, e_batt, out);
}

#undef PVSOC_DISPATCH

}  // namespace pvsoc::kernels
