#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "thinspectra/assembly.hpp"
#include "thinspectra/errors.hpp"
#include "thinspectra/sparse.hpp"

namespace thinspectra {

struct SolverOptions {
  int block_size = 4;
  double tol = 1e-10;
  int max_iter = 500;  // restarts
  std::uint64_t seed = 0x5eed'2024ULL;
  int subspace = 0;  // basis size before a restart; 0 picks max(2k + 2p, k + 4p, 24)
  bool operator==(const SolverOptions&) const = default;
};

/// Eigenpairs of K x = lambda M x in ascending order with M-orthonormal vectors.
struct Spectrum {
  std::vector<double> values;
  Eigen::MatrixXd vectors;      // one column per value
  std::vector<double> residuals;  // see smallest_eigenpairs / dense_oracle
  Eigen::MatrixXd mass_gram;    // vectors^T M vectors
  std::vector<bool> converged;
  int iterations = 0;

  int size() const noexcept { return static_cast<int>(values.size()); }
};

class NotConvergedError : public Error {
 public:
  NotConvergedError(int max_iter, Spectrum partial);
  const Spectrum& partial() const noexcept { return partial_; }

 private:
  Spectrum partial_;
};

/// k smallest eigenpairs by thick-restarted block Krylov iteration on the
/// shift-invert operator T = K^{-1} M (shift 0), which is self-adjoint in the
/// M inner product. A pair (theta = 1/lambda, x) is accepted once
/// ||T x - theta x||_M <= tol * theta, which bounds the relative eigenvalue
/// error by tol. `residuals` holds ||T x - theta x||_M / theta.
///
/// Throws FactorizationFailure if K is not positive definite and
/// NotConvergedError (carrying the partial result) after max_iter restarts.
Spectrum smallest_eigenpairs(const SparseSymmetric& K, const SparseSymmetric& M, int k,
                             const SolverOptions& options = {});
Spectrum smallest_eigenpairs(const Pencil& pencil, int k, const SolverOptions& options = {});

inline constexpr int kDenseOracleLimit = 2000;

/// All eigenpairs from a dense Cholesky reduction of M. `residuals` holds the
/// normwise backward error ||Kx - lambda Mx|| / ((||K|| + |lambda| ||M||) ||x||).
/// Throws TooLarge above kDenseOracleLimit unknowns.
Spectrum dense_oracle(const SparseSymmetric& K, const SparseSymmetric& M);
Spectrum dense_oracle(const Pencil& pencil);

/// max |x_i^T M x_j - delta_ij| over the columns of `vectors`.
double mass_orthonormality_deviation(const Eigen::MatrixXd& vectors, const SparseSymmetric& M);

/// Normwise backward error of one pair.
double backward_error(const SparseSymmetric& K, const SparseSymmetric& M, double lambda, const Eigen::VectorXd& x);

}  // namespace thinspectra
