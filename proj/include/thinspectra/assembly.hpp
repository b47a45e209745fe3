#pragma once

// Discrete pencil (K, M) for the rescaled two-part problem.
//
// Part A carries the stiffness D_{x'}u D_{x'}v / r^2 + d_N u d_N v and unit mass;
// part B carries weight w = h / r^{N-1} on both forms, with d_N u d_N v scaled
// by 1/h^2. Dirichlet nodes are deleted, and every bottom node of part A is
// tied to the interpolated trace of part B at the shrunk point r x'.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "thinspectra/geometry_mesh.hpp"
#include "thinspectra/sparse.hpp"

namespace thinspectra {

struct TieEntry {
  std::int32_t master = 0;
  double weight = 0.0;
};

struct Tie {
  std::int32_t slave = 0;
  std::vector<TieEntry> masters;
};

struct ConstraintSet {
  double r = 0.0;
  std::vector<std::int32_t> dirichlet;  // sorted node ids
  std::vector<Tie> ties;
};

/// Dirichlet nodes (top of A, lateral boundary of B) plus one tie per
/// JUNCTION_A node. Throws PointLocationFailure if r x' falls outside the
/// part-B surface mesh.
ConstraintSet build_constraints(const Mesh& mesh, double r);

/// Maps full node vectors onto free unknowns and back.
class DofMap {
 public:
  enum class Kind : std::uint8_t { Free, Dirichlet, Slave };

  DofMap() = default;
  DofMap(std::int32_t node_count, const ConstraintSet& constraints);

  std::int32_t node_count() const noexcept { return static_cast<std::int32_t>(kind_.size()); }
  std::int32_t free_count() const noexcept { return free_count_; }
  Kind kind(std::int32_t node) const { return kind_[node]; }

  /// Free-index combination representing the node value (empty for Dirichlet).
  std::span<const TieEntry> expansion(std::int32_t node) const;

  /// Node values from free values (slaves interpolated, Dirichlet zero).
  std::vector<double> expand(std::span<const double> free) const;
  /// Free values sampled from node values (ignores slave and Dirichlet nodes).
  std::vector<double> restrict_free(std::span<const double> full) const;

 private:
  std::vector<Kind> kind_;
  std::vector<std::int64_t> offset_;
  std::vector<TieEntry> entries_;  // master field holds a free index here
  std::int32_t free_count_ = 0;
};

struct Pencil {
  int dim = 2;
  ThinParams params;
  SparseSymmetric K;
  SparseSymmetric M;
  DofMap dofs;

  std::int32_t order() const noexcept { return K.order(); }
};

struct FormWeights {
  double cross_a = 1.0;  // coefficient of D_{x'} terms in A
  double axial_a = 1.0;
  double mass_a = 1.0;
  double cross_b = 1.0;
  double axial_b = 1.0;
  double mass_b = 1.0;
};

FormWeights form_weights(int dim, const ThinParams& params);

/// Element stiffness and mass of an axis-aligned cell by 2-point Gauss
/// quadrature per direction (exact for multilinear products). Row-major
/// (2^dim)^2 arrays, local nodes in the Element corner order.
struct ElementMatrices {
  std::array<double, 64> stiffness{};
  std::array<double, 64> mass{};
};
ElementMatrices element_matrices(const Element& e, int dim, const FormWeights& w);

/// Unconstrained matrices on all mesh nodes.
struct FullOperators {
  SparseSymmetric K;
  SparseSymmetric M;
};
FullOperators assemble_full(const Mesh& mesh, const ThinParams& params);

/// Unit-weight L2 mass of one part on full node numbering (zero rows elsewhere).
SparseSymmetric assemble_part_mass(const Mesh& mesh, Part part);

/// Assembles K and M on the free unknowns by substituting the constraints.
/// Throws SingularMass if a free row of M ends up empty.
Pencil assemble_pencil(const Mesh& mesh, const ThinParams& params, const ConstraintSet& constraints);

/// Coordinate listing "row col value" of K and M, each preceded by a "# K"/"# M" line.
void write_pencil(std::ostream& os, const Pencil& pencil);

}  // namespace thinspectra
