#include "thinspectra/sparse.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "thinspectra/errors.hpp"

namespace thinspectra {

SparseSymmetric SparseSymmetric::from_triplets(std::int32_t order, std::vector<Triplet> triplets) {
  for (auto& t : triplets) {
    if (t.row < 0 || t.col < 0 || t.row >= order || t.col >= order) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("triplet ({},{}) outside order {}", t.row, t.col, order));
    }
    if (t.col > t.row) std::swap(t.row, t.col);
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseSymmetric m;
  m.order_ = order;
  m.row_ptr_.assign(static_cast<std::size_t>(order) + 1, 0);
  m.col_.reserve(triplets.size());
  m.val_.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    const std::int32_t r = triplets[i].row;
    const std::int32_t c = triplets[i].col;
    double v = 0.0;
    for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i) v += triplets[i].value;
    if (v == 0.0 && r != c) continue;
    m.col_.push_back(c);
    m.val_.push_back(v);
    ++m.row_ptr_[static_cast<std::size_t>(r) + 1];
  }
  for (std::int32_t r = 0; r < order; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

void SparseSymmetric::multiply(std::span<const double> x, std::span<double> y) const {
  kernels::sym_lower_spmv(view(), x, y);
}

Eigen::VectorXd SparseSymmetric::operator*(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(order_);
  multiply({x.data(), static_cast<std::size_t>(x.size())}, {y.data(), static_cast<std::size_t>(y.size())});
  return y;
}

double SparseSymmetric::bilinear(std::span<const double> x, std::span<const double> y) const {
  std::vector<double> ay(static_cast<std::size_t>(order_));
  multiply(y, ay);
  return kernels::dot(x, ay);
}

double SparseSymmetric::diagonal(std::int32_t i) const {
  const std::int64_t end = row_ptr_[i + 1];
  if (end > row_ptr_[i] && col_[end - 1] == i) return val_[end - 1];
  return 0.0;
}

double SparseSymmetric::norm_inf() const {
  std::vector<double> rows(static_cast<std::size_t>(order_), 0.0);
  for (std::int32_t r = 0; r < order_; ++r) {
    for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      rows[r] += std::abs(val_[p]);
      if (col_[p] != r) rows[col_[p]] += std::abs(val_[p]);
    }
  }
  return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

SparseSymmetric SparseSymmetric::scaled(double factor) const {
  SparseSymmetric m = *this;
  for (double& v : m.val_) v *= factor;
  return m;
}

Eigen::SparseMatrix<double> SparseSymmetric::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(val_.size() * 2);
  for (std::int32_t r = 0; r < order_; ++r) {
    for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      t.emplace_back(r, col_[p], val_[p]);
      if (col_[p] != r) t.emplace_back(col_[p], r, val_[p]);
    }
  }
  Eigen::SparseMatrix<double> a(order_, order_);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

Eigen::MatrixXd SparseSymmetric::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(order_, order_);
  for (std::int32_t r = 0; r < order_; ++r) {
    for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      a(r, col_[p]) = val_[p];
      a(col_[p], r) = val_[p];
    }
  }
  return a;
}

void write_coo(std::ostream& os, const SparseSymmetric& a) {
  for (std::int32_t r = 0; r < a.order(); ++r) {
    for (std::int64_t p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      fmt::print(os, "{} {} {:.17g}\n", r, a.col()[p], a.val()[p]);
    }
  }
}

}  // namespace thinspectra
