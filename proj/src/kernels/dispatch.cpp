#include <atomic>
#include <cstdlib>
#include <string_view>

#include "thinspectra/kernels.hpp"

namespace thinspectra::kernels {

std::string_view to_string(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool cpu_has_avx2() noexcept {
#if defined(THINSPECTRA_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Isa detect() noexcept {
  if (const char* env = std::getenv("THINSPECTRA_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

Isa force_isa(Isa isa) noexcept {
  if (isa == Isa::Avx2 && !cpu_has_avx2()) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

#if defined(THINSPECTRA_HAVE_AVX2_KERNELS)
#define THINSPECTRA_DISPATCH(call) \
  (active_isa() == Isa::Avx2 ? avx2::call : scalar::call)
#else
#define THINSPECTRA_DISPATCH(call) (scalar::call)
#endif

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return THINSPECTRA_DISPATCH(dot(x, y));
}

void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  THINSPECTRA_DISPATCH(axpy(a, x, y));
}

void scal(double a, std::span<double> x) noexcept { THINSPECTRA_DISPATCH(scal(a, x)); }

void sym_lower_spmv(const SymLowerCsr& a, std::span<const double> x, std::span<double> y) noexcept {
  THINSPECTRA_DISPATCH(sym_lower_spmv(a, x, y));
}

}  // namespace thinspectra::kernels
