#pragma once

// Inner-loop kernels used by the eigensolver and the sparse matrix type.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2+FMA variant compiled in its own translation unit. The variant is
// picked once at runtime from the CPU feature bits; setting the environment
// variable THINSPECTRA_SIMD=scalar forces the reference path.

#include <cstdint>
#include <span>
#include <string_view>

namespace thinspectra::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Lower-triangular CSR view of a symmetric matrix. Row i holds columns <= i.
struct SymLowerCsr {
  std::span<const std::int64_t> row_ptr;
  std::span<const std::int32_t> col;
  std::span<const double> val;
};

namespace scalar {
double dot(std::span<const double> x, std::span<const double> y) noexcept;
void axpy(double a, std::span<const double> x, std::span<double> y) noexcept;
void scal(double a, std::span<double> x) noexcept;
void sym_lower_spmv(const SymLowerCsr& a, std::span<const double> x, std::span<double> y) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define THINSPECTRA_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(std::span<const double> x, std::span<const double> y) noexcept;
void axpy(double a, std::span<const double> x, std::span<double> y) noexcept;
void scal(double a, std::span<double> x) noexcept;
void sym_lower_spmv(const SymLowerCsr& a, std::span<const double> x, std::span<double> y) noexcept;
}  // namespace avx2
#endif

/// True when the running CPU can execute the AVX2 variants.
bool cpu_has_avx2() noexcept;

/// The variant currently used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Pins the dispatch to one variant (tests use this). Requesting Avx2 on a CPU
/// without it falls back to Scalar; the effective choice is returned.
Isa force_isa(Isa isa) noexcept;

double dot(std::span<const double> x, std::span<const double> y) noexcept;
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y) noexcept;
void scal(double a, std::span<double> x) noexcept;
/// y = A x for symmetric A stored as its lower triangle.
void sym_lower_spmv(const SymLowerCsr& a, std::span<const double> x, std::span<double> y) noexcept;

}  // namespace thinspectra::kernels
