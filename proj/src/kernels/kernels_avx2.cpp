// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher.
#include "thinspectra/kernels.hpp"

#include <immintrin.h>

#include <cstddef>

namespace thinspectra::kernels::avx2 {

namespace {

inline double hsum(__m256d v) noexcept {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  const std::size_t n = x.size();
  const double* px = x.data();
  const double* py = y.data();
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i + 4), _mm256_loadu_pd(py + i + 4), a1);
  }
  for (; i + 4 <= n; i += 4) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), a0);
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += px[i] * py[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  const std::size_t n = x.size();
  const double* px = x.data();
  double* py = y.data();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(py + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i)));
  }
  for (; i < n; ++i) py[i] += a * px[i];
}

void scal(double a, std::span<double> x) noexcept {
  const std::size_t n = x.size();
  double* px = x.data();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(px + i, _mm256_mul_pd(va, _mm256_loadu_pd(px + i)));
  for (; i < n; ++i) px[i] *= a;
}

void sym_lower_spmv(const SymLowerCsr& a, std::span<const double> x, std::span<double> y) noexcept {
  const std::size_t n = y.size();
  const double* px = x.data();
  double* py = y.data();
  for (std::size_t i = 0; i < n; ++i) py[i] = 0.0;
  alignas(32) double lanes[4];
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t p = a.row_ptr[i];
    const std::int64_t end = a.row_ptr[i + 1];
    const __m256d xi = _mm256_set1_pd(px[i]);
    __m256d acc = _mm256_setzero_pd();
    for (; p + 4 <= end; p += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.col.data() + p));
      const __m256d v = _mm256_loadu_pd(a.val.data() + p);
      acc = _mm256_fmadd_pd(v, _mm256_i32gather_pd(px, idx, 8), acc);
      _mm256_store_pd(lanes, _mm256_mul_pd(v, xi));
      for (int l = 0; l < 4; ++l) {
        const auto j = static_cast<std::size_t>(a.col[p + l]);
        if (j != i) py[j] += lanes[l];
      }
    }
    double s = hsum(acc);
    for (; p < end; ++p) {
      const auto j = static_cast<std::size_t>(a.col[p]);
      const double v = a.val[p];
      s += v * px[j];
      if (j != i) py[j] += v * px[i];
    }
    py[i] += s;
  }
}

}  // namespace thinspectra::kernels::avx2
