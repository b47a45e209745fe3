#include "thinspectra/assembly.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "thinspectra/errors.hpp"

namespace thinspectra {

namespace {

/// Locates t on a sorted axis; returns the cell index and the local coordinate in [0,1].
bool locate(const std::vector<double>& axis, double t, std::size_t& cell, double& local) {
  const double lo = axis.front();
  const double hi = axis.back();
  const double slack = 1e-12 * (hi - lo);
  if (t < lo - slack || t > hi + slack) return false;
  t = std::clamp(t, lo, hi);
  auto it = std::upper_bound(axis.begin(), axis.end(), t);
  std::size_t i = it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
  if (i + 1 >= axis.size()) i = axis.size() - 2;
  cell = i;
  local = (t - axis[i]) / (axis[i + 1] - axis[i]);
  return true;
}

}  // namespace

ConstraintSet build_constraints(const Mesh& mesh, double r) {
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("r={} not in (0,1)", r));
  ConstraintSet cs;
  cs.r = r;
  const int ncross = mesh.dim() - 1;
  const PartGrid& gb = mesh.grid(Part::B);
  const std::int32_t top_k = gb.nodes_along(mesh.dim() - 1) - 1;

  for (std::int32_t id = 0; id < mesh.node_count(); ++id) {
    const Node& node = mesh.nodes()[id];
    if (node.tags & (tags::kDirichletTop | tags::kDirichletLateralB)) cs.dirichlet.push_back(id);
    if (!(node.tags & tags::kJunctionA)) continue;

    std::array<std::size_t, 2> cell{};
    std::array<double, 2> local{};
    for (int ax = 0; ax < ncross; ++ax) {
      const double target = r * node.xp[ax];
      if (!locate(gb.axes[ax], target, cell[ax], local[ax])) {
        throw Error(ErrorCode::PointLocationFailure,
                    fmt::format("node {}: r*x'={:.9g} outside the part-B surface", id, target));
      }
    }
    Tie tie;
    tie.slave = id;
    const int corners = 1 << ncross;
    for (int c = 0; c < corners; ++c) {
      double w = 1.0;
      std::array<std::int32_t, 3> ijk{0, 0, 0};
      for (int ax = 0; ax < ncross; ++ax) {
        const int bit = (c >> ax) & 1;
        w *= bit ? local[ax] : 1.0 - local[ax];
        ijk[ax] = static_cast<std::int32_t>(cell[ax]) + bit;
      }
      ijk[ncross] = top_k;
      if (w == 0.0) continue;
      tie.masters.push_back({gb.node_index(ijk), w});
    }
    cs.ties.push_back(std::move(tie));
  }
  return cs;
}

DofMap::DofMap(std::int32_t node_count, const ConstraintSet& constraints) {
  kind_.assign(static_cast<std::size_t>(node_count), Kind::Free);
  for (std::int32_t d : constraints.dirichlet) kind_[d] = Kind::Dirichlet;
  std::vector<const Tie*> tie_of(static_cast<std::size_t>(node_count), nullptr);
  for (const Tie& t : constraints.ties) {
    if (kind_[t.slave] == Kind::Dirichlet) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("node {} is both Dirichlet and tie slave", t.slave));
    }
    kind_[t.slave] = Kind::Slave;
    tie_of[t.slave] = &t;
  }
  std::vector<std::int32_t> free_index(static_cast<std::size_t>(node_count), -1);
  for (std::int32_t i = 0; i < node_count; ++i) {
    if (kind_[i] == Kind::Free) free_index[i] = free_count_++;
  }
  offset_.assign(static_cast<std::size_t>(node_count) + 1, 0);
  for (std::int32_t i = 0; i < node_count; ++i) {
    switch (kind_[i]) {
      case Kind::Free: entries_.push_back({free_index[i], 1.0}); break;
      case Kind::Dirichlet: break;
      case Kind::Slave:
        for (const TieEntry& m : tie_of[i]->masters) {
          if (kind_[m.master] == Kind::Slave) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("tie master {} is itself a slave", m.master));
          }
          if (kind_[m.master] == Kind::Dirichlet) continue;
          entries_.push_back({free_index[m.master], m.weight});
        }
        break;
    }
    offset_[i + 1] = static_cast<std::int64_t>(entries_.size());
  }
}

std::span<const TieEntry> DofMap::expansion(std::int32_t node) const {
  return std::span<const TieEntry>(entries_).subspan(static_cast<std::size_t>(offset_[node]),
                                                     static_cast<std::size_t>(offset_[node + 1] - offset_[node]));
}

std::vector<double> DofMap::expand(std::span<const double> free) const {
  std::vector<double> full(kind_.size(), 0.0);
  for (std::int32_t i = 0; i < node_count(); ++i) {
    double v = 0.0;
    for (const TieEntry& e : expansion(i)) v += e.weight * free[e.master];
    full[i] = v;
  }
  return full;
}

std::vector<double> DofMap::restrict_free(std::span<const double> full) const {
  std::vector<double> free(static_cast<std::size_t>(free_count_), 0.0);
  for (std::int32_t i = 0; i < node_count(); ++i) {
    if (kind_[i] == Kind::Free) free[expansion(i)[0].master] = full[i];
  }
  return free;
}

FormWeights form_weights(int dim, const ThinParams& params) {
  const double w = volume_ratio(dim, params);
  FormWeights f;
  f.cross_a = 1.0 / (params.r * params.r);
  f.axial_a = 1.0;
  f.mass_a = 1.0;
  f.cross_b = w;
  f.axial_b = w / (params.h * params.h);
  f.mass_b = w;
  return f;
}

ElementMatrices element_matrices(const Element& e, int dim, const FormWeights& w) {
  const bool in_a = e.part == Part::A;
  const double cross = in_a ? w.cross_a : w.cross_b;
  const double axial = in_a ? w.axial_a : w.axial_b;
  const double mass = in_a ? w.mass_a : w.mass_b;
  const int corners = 1 << dim;
  std::array<double, 3> size{};
  double volume = 1.0;
  for (int d = 0; d < dim; ++d) {
    size[d] = e.hi[d] - e.lo[d];
    volume *= size[d];
  }
  const double g = 0.5 / std::sqrt(3.0);
  const std::array<double, 2> pts{0.5 - g, 0.5 + g};
  const int nq = 1 << dim;

  ElementMatrices out;
  for (int q = 0; q < nq; ++q) {
    std::array<double, 3> xi{};
    for (int d = 0; d < dim; ++d) xi[d] = pts[(q >> d) & 1];
    const double wq = volume / nq;  // each Gauss weight is 1/2 per direction
    std::array<double, 8> phi{};
    std::array<std::array<double, 3>, 8> grad{};
    for (int c = 0; c < corners; ++c) {
      std::array<double, 3> f{};
      for (int d = 0; d < dim; ++d) f[d] = ((c >> d) & 1) ? xi[d] : 1.0 - xi[d];
      phi[c] = 1.0;
      for (int d = 0; d < dim; ++d) phi[c] *= f[d];
      for (int d = 0; d < dim; ++d) {
        double gd = (((c >> d) & 1) ? 1.0 : -1.0) / size[d];
        for (int o = 0; o < dim; ++o) {
          if (o != d) gd *= f[o];
        }
        grad[c][d] = gd;
      }
    }
    for (int i = 0; i < corners; ++i) {
      for (int j = 0; j < corners; ++j) {
        double k = 0.0;
        for (int d = 0; d < dim; ++d) k += (d == dim - 1 ? axial : cross) * grad[i][d] * grad[j][d];
        out.stiffness[i * corners + j] += wq * k;
        out.mass[i * corners + j] += wq * mass * phi[i] * phi[j];
      }
    }
  }
  return out;
}

namespace {

template <class Expand>
FullOperators assemble_with(const Mesh& mesh, const ThinParams& params, std::int32_t order, Expand&& expand) {
  const FormWeights w = form_weights(mesh.dim(), params);
  const int corners = 1 << mesh.dim();
  std::vector<Triplet> kt;
  std::vector<Triplet> mt;
  kt.reserve(mesh.elements().size() * corners * corners);
  mt.reserve(mesh.elements().size() * corners * corners);
  for (const Element& e : mesh.elements()) {
    const ElementMatrices em = element_matrices(e, mesh.dim(), w);
    for (int i = 0; i < corners; ++i) {
      const auto ei = expand(e.nodes[i]);
      for (int j = 0; j < corners; ++j) {
        const auto ej = expand(e.nodes[j]);
        const double kv = em.stiffness[i * corners + j];
        const double mv = em.mass[i * corners + j];
        for (const TieEntry& a : ei) {
          for (const TieEntry& b : ej) {
            if (a.master < b.master) continue;  // lower triangle only
            const double s = a.weight * b.weight;
            kt.push_back({a.master, b.master, s * kv});
            mt.push_back({a.master, b.master, s * mv});
          }
        }
      }
    }
  }
  return {SparseSymmetric::from_triplets(order, std::move(kt)), SparseSymmetric::from_triplets(order, std::move(mt))};
}

}  // namespace

FullOperators assemble_full(const Mesh& mesh, const ThinParams& params) {
  std::vector<TieEntry> identity(static_cast<std::size_t>(mesh.node_count()));
  for (std::int32_t i = 0; i < mesh.node_count(); ++i) identity[i] = {i, 1.0};
  return assemble_with(mesh, params, mesh.node_count(), [&](std::int32_t node) {
    return std::span<const TieEntry>(identity).subspan(static_cast<std::size_t>(node), 1);
  });
}

SparseSymmetric assemble_part_mass(const Mesh& mesh, Part part) {
  const int corners = 1 << mesh.dim();
  FormWeights unit;
  std::vector<Triplet> t;
  for (const Element& e : mesh.elements()) {
    if (e.part != part) continue;
    const ElementMatrices em = element_matrices(e, mesh.dim(), unit);
    for (int i = 0; i < corners; ++i) {
      for (int j = 0; j < corners; ++j) {
        if (e.nodes[i] < e.nodes[j]) continue;
        t.push_back({e.nodes[i], e.nodes[j], em.mass[i * corners + j]});
      }
    }
  }
  return SparseSymmetric::from_triplets(mesh.node_count(), std::move(t));
}

Pencil assemble_pencil(const Mesh& mesh, const ThinParams& params, const ConstraintSet& constraints) {
  Pencil p;
  p.dim = mesh.dim();
  p.params = params;
  p.dofs = DofMap(mesh.node_count(), constraints);
  FullOperators ops = assemble_with(mesh, params, p.dofs.free_count(),
                                    [&](std::int32_t node) { return p.dofs.expansion(node); });
  p.K = std::move(ops.K);
  p.M = std::move(ops.M);
  for (std::int32_t i = 0; i < p.M.order(); ++i) {
    if (!(p.M.diagonal(i) > 0.0)) {
      throw Error(ErrorCode::SingularMass, fmt::format("free row {} of M has no positive diagonal", i));
    }
  }
  return p;
}

void write_pencil(std::ostream& os, const Pencil& pencil) {
  fmt::print(os, "# K order {}\n", pencil.order());
  write_coo(os, pencil.K);
  fmt::print(os, "# M order {}\n", pencil.order());
  write_coo(os, pencil.M);
}

}  // namespace thinspectra
