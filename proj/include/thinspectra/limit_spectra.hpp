#pragma once

// Exact limit spectra of the reduced problems.
//
// N = 2 with a finite volume ratio q couples the rod (0,1) to the
// cross-section (c,d) through continuity at the junction and the flux balance
// |omega| u_a'(0) = q (u_b'(0-) - u_b'(0+)). The other cases decouple into
// closed-form branches that are gathered with multiplicities added.
//
// Eigenvector descriptors use one trigonometric form for every branch:
//   u_a(x_N) = a_amp sin(s (1 - x_N)),             s = sqrt(lambda)
//   u_b(x)   = b_minus sin(s (x - c))   on (c, 0)  (N = 2)
//            = b_plus  sin(s (d - x))   on (0, d)
//   u_b(x,y) = b_amp sin(i pi (x + wx) / 2wx) sin(j pi (y + wy) / 2wy)   (N = 3)

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "thinspectra/geometry_mesh.hpp"

namespace thinspectra {

enum class Branch : std::uint8_t {
  RodND = 1u << 0,
  RodDD = 1u << 1,
  Cross = 1u << 2,
  CrossLeft = 1u << 3,
  CrossRight = 1u << 4,
  Coupled = 1u << 5,
};

using BranchSet = std::uint8_t;

constexpr BranchSet operator|(Branch a, Branch b) noexcept {
  return static_cast<BranchSet>(static_cast<BranchSet>(a) | static_cast<BranchSet>(b));
}
constexpr bool has(BranchSet set, Branch b) noexcept { return (set & static_cast<BranchSet>(b)) != 0; }

/// "ROD_ND+CROSS" style label.
std::string branch_label(BranchSet set);

struct LimitEigenvector {
  Geometry geometry;
  Regime regime = Regime::Finite;
  Branch branch = Branch::Coupled;
  double lambda = 0.0;
  double a_amp = 0.0;
  double b_minus = 0.0;
  double b_plus = 0.0;
  double b_amp = 0.0;
  int i = 0;
  int j = 0;

  double a_value(double xn) const;
  double a_slope(double xn) const;
  /// x' = (x) for N = 2, (x, y) for N = 3.
  double b_value(std::array<double, 2> xp) const;
  std::array<double, 2> b_gradient(std::array<double, 2> xp) const;

  void scale(double factor);
};

struct LimitEigenvalue {
  double value = 0.0;
  int multiplicity = 1;
  BranchSet branches = 0;
  std::vector<LimitEigenvector> vectors;  // one per unit of multiplicity
};

struct LimitSpectrum {
  std::vector<LimitEigenvalue> entries;  // strictly ascending
  RegimeSpec regime;
  Geometry geometry;

  /// Values repeated by multiplicity, first `count` of them.
  std::vector<double> expanded(int count) const;
  std::vector<double> values() const;
};

/// (pi/2 + k pi)^2, k = 0..k_max-1, with u_a = cos((pi/2 + k pi) x_N).
std::vector<LimitEigenvalue> rod_neumann_dirichlet(const Geometry& geometry, int k_max);
/// (k pi)^2, k = 1..k_max, with u_a = sin(k pi x_N).
std::vector<LimitEigenvalue> rod_dirichlet_dirichlet(const Geometry& geometry, int k_max);

/// Dirichlet spectrum of omega: (k pi / (d - c))^2 on an interval, or the
/// rectangle's (i pi / 2wx)^2 + (j pi / 2wy)^2 with degenerate pairs merged.
/// With `split` (intervals only) the sub-intervals (c,0) and (0,d) are used
/// instead and their coincident values merged. First k_max distinct values.
std::vector<LimitEigenvalue> cross_section_dirichlet(const Geometry& geometry, int k_max, bool split = false);

/// Coupled junction problem on an interval cross-section.
struct JunctionProblem {
  double c = -1.0;
  double d = 1.0;
  double measure = 2.0;
  double q = 1.0;
};

/// The transcendental function F(lambda) whose positive roots are the coupled
/// eigenvalues; `scale` receives the largest magnitude of its three terms.
double junction_function(const JunctionProblem& p, double lambda, double* scale = nullptr);
/// Size of F near lambda: the largest term magnitude at s and at the two
/// neighbouring scan points s -+ pi / (8 max(1, |c|, d)). All three terms can
/// vanish together at a root, so the pointwise value alone is no scale.
double junction_scale(const JunctionProblem& p, double lambda);
/// dF/ds with s = sqrt(lambda).
double junction_function_ds(const JunctionProblem& p, double s);

/// Matrix of the three junction equations acting on (A, B-, B+); the flux row
/// is divided by sqrt(lambda) so that det J(lambda) = F(lambda).
Eigen::Matrix3d junction_matrix(const JunctionProblem& p, double lambda);

/// Number of singular values below 1e-8 * sigma_max.
int junction_nullity(const Eigen::Matrix3d& j);

/// First k_max distinct positive roots of F, each with multiplicity given by
/// the nullity of J and a [.,.]_q-orthonormal basis of descriptors. Throws
/// RootLoss when a bracket cannot be certified.
std::vector<LimitEigenvalue> coupled_junction_spectrum(const Geometry& geometry, double q, int k_max);
std::vector<LimitEigenvalue> coupled_junction_spectrum(const JunctionProblem& p, int k_max);

/// Regime-dependent limit spectrum, first k_max distinct values; coincident
/// branch values (within 1e-9 max(1, lambda)) are merged.
LimitSpectrum gathered_spectrum(const RegimeSpec& regime, const Geometry& geometry, int k_max);

struct LimitProducts {
  double mass = 0.0;    // [u, v]_q
  double energy = 0.0;  // alpha_q(u, v)
};

/// Closed-form |omega| int u_a v_a + q int_omega u_b v_b and the matching
/// energy form; q is replaced by 1 outside the finite regime. Throws
/// RegimeMismatch when u, v and `regime` disagree.
LimitProducts limit_inner_products(const LimitEigenvector& u, const LimitEigenvector& v, const RegimeSpec& regime);

/// True when the descriptor satisfies the boundary and junction conditions of
/// its space (V, V_0 or V_inf) to within tol.
bool satisfies_space_conditions(const LimitEigenvector& u, double tol = 1e-12);

}  // namespace thinspectra
