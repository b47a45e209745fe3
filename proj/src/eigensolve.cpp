#include "thinspectra/eigensolve.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <span>

#include "thinspectra/kernels.hpp"

namespace thinspectra {

NotConvergedError::NotConvergedError(int max_iter, Spectrum partial)
    : Error(ErrorCode::NotConverged, fmt::format("no convergence after {} restarts", max_iter)),
      partial_(std::move(partial)) {}

namespace {

using Factor = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>>;

std::span<double> col(Eigen::MatrixXd& a, Eigen::Index j) {
  return {a.col(j).data(), static_cast<std::size_t>(a.rows())};
}

std::span<const double> col(const Eigen::MatrixXd& a, Eigen::Index j) {
  return {a.col(j).data(), static_cast<std::size_t>(a.rows())};
}

std::span<double> as_span(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

/// Krylov basis V with cached M V and T V, kept M-orthonormal.
class Basis {
 public:
  Basis(const SparseSymmetric& M, Eigen::Index n, Eigen::Index capacity)
      : V(n, capacity), MV(n, capacity), TV(n, capacity), M_(M), scratch_(n) {}

  Eigen::Index size() const noexcept { return size_; }
  Eigen::Index rows() const noexcept { return V.rows(); }
  void truncate(Eigen::Index j) { size_ = j; }

  /// Two passes of classical Gram-Schmidt against the first `upto` columns.
  void project_out(std::span<double> w, Eigen::Index upto) const {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < upto; ++i) {
        const double c = kernels::dot(col(MV, i), w);
        kernels::axpy(-c, col(V, i), w);
      }
    }
  }

  /// Appends w after orthogonalization; false if w is (numerically) in the span.
  bool append(Eigen::VectorXd w) {
    if (size_ >= V.cols()) return false;
    M_.multiply(as_span(w), as_span(scratch_));
    const double before = std::sqrt(std::max(0.0, kernels::dot(as_span(w), as_span(scratch_))));
    if (!(before > 0.0)) return false;
    project_out(as_span(w), size_);
    M_.multiply(as_span(w), as_span(scratch_));
    const double after = std::sqrt(std::max(0.0, kernels::dot(as_span(w), as_span(scratch_))));
    if (!(after > 1e-8 * before)) return false;
    V.col(size_) = w / after;
    MV.col(size_) = scratch_ / after;
    ++size_;
    return true;
  }

  Eigen::MatrixXd V;
  Eigen::MatrixXd MV;
  Eigen::MatrixXd TV;

 private:
  const SparseSymmetric& M_;
  Eigen::Index size_ = 0;
  Eigen::VectorXd scratch_;
};

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

/// Appends w, falling back to random directions when w is dependent.
void append_or_random(Basis& basis, Eigen::VectorXd w, std::mt19937_64& rng) {
  if (basis.append(std::move(w))) return;
  for (int attempt = 0; attempt < 8 && basis.size() < basis.rows(); ++attempt) {
    if (basis.append(random_vector(basis.rows(), rng))) return;
  }
}

}  // namespace

Spectrum smallest_eigenpairs(const SparseSymmetric& K, const SparseSymmetric& M, int k, const SolverOptions& options) {
  const Eigen::Index n = K.order();
  if (M.order() != n) throw Error(ErrorCode::InvalidArgument, "K and M orders differ");
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidArgument, fmt::format("k={} not in [1,{}]", k, n));
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  const Eigen::Index p = std::clamp<Eigen::Index>(options.block_size, 1, n);

  Factor factor;
  factor.compute(K.to_eigen());
  if (factor.info() != Eigen::Success || !(factor.vectorD().minCoeff() > 0.0)) {
    throw Error(ErrorCode::FactorizationFailure, "K is not positive definite");
  }

  Eigen::Index capacity = options.subspace > 0
                              ? std::max<Eigen::Index>(options.subspace, k + 2 * p)
                              : std::max<Eigen::Index>({2 * k + 2 * p, k + 4 * p, 24});
  capacity = std::min(capacity, n);

  std::mt19937_64 rng(options.seed);
  Basis basis(M, n, capacity);
  for (Eigen::Index i = 0; i < p; ++i) append_or_random(basis, random_vector(n, rng), rng);
  Eigen::Index frontier = 0;  // columns [frontier, size) still need T applied

  Spectrum out;
  Eigen::VectorXd scratch(n);
  Eigen::VectorXd residual(n);
  for (int restart = 0;; ++restart) {
    // Expand until the basis is full (or spans the whole space).
    for (;;) {
      const Eigen::Index j = basis.size();
      for (Eigen::Index c = frontier; c < j; ++c) basis.TV.col(c) = factor.solve(basis.MV.col(c));
      if (j == n || j + 1 > capacity || j + std::min(p, n - j) > capacity) break;
      const Eigen::Index added_from = j;
      for (Eigen::Index c = frontier; c < j && basis.size() < capacity; ++c) {
        append_or_random(basis, basis.TV.col(c), rng);
      }
      frontier = added_from;
      if (basis.size() == added_from) break;  // invariant subspace and no room for random fill
    }

    const Eigen::Index j = basis.size();
    Eigen::MatrixXd H = basis.MV.leftCols(j).transpose() * basis.TV.leftCols(j);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(H);
    const Eigen::Index want = std::min<Eigen::Index>(k, j);
    const Eigen::Index keep = std::min<Eigen::Index>(j, std::max<Eigen::Index>(want, std::min(k + p, capacity - 2 * p)));
    // Largest theta first.
    Eigen::MatrixXd Z(j, keep);
    Eigen::VectorXd theta(keep);
    for (Eigen::Index i = 0; i < keep; ++i) {
      Z.col(i) = rr.eigenvectors().col(j - 1 - i);
      theta[i] = rr.eigenvalues()[j - 1 - i];
    }
    const Eigen::MatrixXd X = basis.V.leftCols(j) * Z;
    const Eigen::MatrixXd TX = basis.TV.leftCols(j) * Z;

    out.values.assign(static_cast<std::size_t>(want), 0.0);
    out.residuals.assign(static_cast<std::size_t>(want), 0.0);
    out.converged.assign(static_cast<std::size_t>(want), false);
    bool all = true;
    for (Eigen::Index i = 0; i < want; ++i) {
      residual = TX.col(i) - theta[i] * X.col(i);
      M.multiply(as_span(residual), as_span(scratch));
      const double rn = std::sqrt(std::max(0.0, residual.dot(scratch))) / theta[i];
      out.values[i] = 1.0 / theta[i];
      out.residuals[i] = rn;
      out.converged[i] = rn <= options.tol || j == n;
      all = all && out.converged[i];
    }
    out.iterations = restart;
    if (all || restart >= options.max_iter) {
      out.vectors = X.leftCols(want);
      out.mass_gram.resize(want, want);
      for (Eigen::Index a = 0; a < want; ++a) {
        M.multiply(col(out.vectors, a), as_span(scratch));
        for (Eigen::Index b = 0; b < want; ++b) out.mass_gram(b, a) = kernels::dot(col(out.vectors, b), as_span(scratch));
      }
      if (!all) throw NotConvergedError(options.max_iter, std::move(out));
      return out;
    }

    // Thick restart: keep the leading Ritz vectors, continue from the new
    // Krylov directions T(last block) orthogonalized against the old basis.
    Eigen::MatrixXd next(n, j - frontier);
    for (Eigen::Index c = frontier; c < j; ++c) {
      next.col(c - frontier) = basis.TV.col(c);
      basis.project_out(col(next, c - frontier), j);
    }
    const Eigen::MatrixXd MX = basis.MV.leftCols(j) * Z;
    basis.V.leftCols(keep) = X;
    basis.MV.leftCols(keep) = MX;
    basis.TV.leftCols(keep) = TX;
    basis.truncate(keep);
    for (Eigen::Index c = 0; c < next.cols() && basis.size() < capacity; ++c) {
      append_or_random(basis, next.col(c), rng);
    }
    frontier = keep;
  }
}

Spectrum smallest_eigenpairs(const Pencil& pencil, int k, const SolverOptions& options) {
  return smallest_eigenpairs(pencil.K, pencil.M, k, options);
}

double backward_error(const SparseSymmetric& K, const SparseSymmetric& M, double lambda, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r = K * x - lambda * (M * x);
  const double scale = (K.norm_inf() + std::abs(lambda) * M.norm_inf()) * x.norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

Spectrum dense_oracle(const SparseSymmetric& K, const SparseSymmetric& M) {
  const Eigen::Index n = K.order();
  if (n > kDenseOracleLimit) {
    throw Error(ErrorCode::TooLarge, fmt::format("order {} exceeds dense oracle limit {}", n, kDenseOracleLimit));
  }
  if (M.order() != n) throw Error(ErrorCode::InvalidArgument, "K and M orders differ");
  const Eigen::MatrixXd Kd = K.to_dense();
  const Eigen::MatrixXd Md = M.to_dense();
  Eigen::LLT<Eigen::MatrixXd> mchol(Md);
  if (mchol.info() != Eigen::Success) throw Error(ErrorCode::FactorizationFailure, "M is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::FactorizationFailure, "dense reduction failed");
  Spectrum out;
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  out.vectors = es.eigenvectors();
  out.mass_gram = out.vectors.transpose() * Md * out.vectors;
  out.converged.assign(static_cast<std::size_t>(n), true);
  out.residuals.resize(static_cast<std::size_t>(n));
  const double kn = K.norm_inf();
  const double mn = M.norm_inf();
  const Eigen::MatrixXd R = Kd * out.vectors - Md * out.vectors * es.eigenvalues().asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.residuals[i] = R.col(i).norm() / ((kn + std::abs(out.values[i]) * mn) * out.vectors.col(i).norm());
  }
  return out;
}

Spectrum dense_oracle(const Pencil& pencil) { return dense_oracle(pencil.K, pencil.M); }

double mass_orthonormality_deviation(const Eigen::MatrixXd& vectors, const SparseSymmetric& M) {
  const Eigen::Index k = vectors.cols();
  Eigen::VectorXd mx(vectors.rows());
  double dev = 0.0;
  for (Eigen::Index a = 0; a < k; ++a) {
    M.multiply(col(vectors, a), as_span(mx));
    for (Eigen::Index b = 0; b < k; ++b) {
      const double g = kernels::dot(col(vectors, b), as_span(mx));
      dev = std::max(dev, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  }
  return dev;
}

}  // namespace thinspectra
