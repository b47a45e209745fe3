#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "thinspectra/kernels.hpp"

namespace thinspectra {

struct Triplet {
  std::int32_t row = 0;
  std::int32_t col = 0;
  double value = 0.0;
};

/// Symmetric sparse matrix stored as the lower triangle in compressed rows,
/// column indices sorted within each row.
class SparseSymmetric {
 public:
  SparseSymmetric() = default;

  /// Folds entries of either triangle onto the lower one and sums duplicates.
  /// Off-diagonal entries that sum to exactly zero are dropped.
  static SparseSymmetric from_triplets(std::int32_t order, std::vector<Triplet> triplets);

  std::int32_t order() const noexcept { return order_; }
  std::int64_t nnz() const noexcept { return static_cast<std::int64_t>(val_.size()); }

  std::span<const std::int64_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::int32_t> col() const noexcept { return col_; }
  std::span<const double> val() const noexcept { return val_; }

  kernels::SymLowerCsr view() const noexcept { return {row_ptr_, col_, val_}; }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
  /// x^T A y
  double bilinear(std::span<const double> x, std::span<const double> y) const;

  double diagonal(std::int32_t i) const;
  /// max_i sum_j |a_ij| over the full symmetric matrix.
  double norm_inf() const;

  SparseSymmetric scaled(double factor) const;

  /// Full symmetric matrix (both triangles) in Eigen's column-major format.
  Eigen::SparseMatrix<double> to_eigen() const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::int32_t order_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int32_t> col_;
  std::vector<double> val_;
};

/// Coordinate listing "row col value" of the stored lower triangle, 0-based.
void write_coo(std::ostream& os, const SparseSymmetric& a);

}  // namespace thinspectra
