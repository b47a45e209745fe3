#include "thinspectra/kernels.hpp"

#include <cstddef>

namespace thinspectra::kernels::scalar {

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scal(double a, std::span<double> x) noexcept {
  for (double& v : x) v *= a;
}

void sym_lower_spmv(const SymLowerCsr& a, std::span<const double> x, std::span<double> y) noexcept {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t begin = a.row_ptr[i];
    const std::int64_t end = a.row_ptr[i + 1];
    double acc = 0.0;
    const double xi = x[i];
    for (std::int64_t p = begin; p < end; ++p) {
      const auto j = static_cast<std::size_t>(a.col[p]);
      const double v = a.val[p];
      acc += v * x[j];
      if (j != i) y[j] += v * xi;
    }
    y[i] += acc;
  }
}

}  // namespace thinspectra::kernels::scalar
