#include "thinspectra/geometry_mesh.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "thinspectra/errors.hpp"

namespace thinspectra {

namespace {

constexpr double kMinCellWidth = 1e-14;

}  // namespace

double Geometry::lower(int axis) const {
  if (is_interval()) return interval().c;
  return axis == 0 ? -rect().half_width : -rect().half_height;
}

double Geometry::upper(int axis) const {
  if (is_interval()) return interval().d;
  return axis == 0 ? rect().half_width : rect().half_height;
}

std::string Geometry::describe() const {
  if (is_interval()) return fmt::format("N=2 omega=({:.9g},{:.9g})", interval().c, interval().d);
  return fmt::format("N=3 omega=(-{0:.9g},{0:.9g})x(-{1:.9g},{1:.9g})", rect().half_width, rect().half_height);
}

Geometry make_geometry(int dim, const OmegaSpec& omega) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::BadDimension, fmt::format("N={} not in {{2,3}}", dim));
  Geometry g;
  g.dim_ = dim;
  g.omega_ = omega;
  if (dim == 2) {
    const auto* iv = std::get_if<Interval>(&omega);
    if (iv == nullptr) throw Error(ErrorCode::BadDimension, "N=2 requires an interval cross-section");
    if (!(std::isfinite(iv->c) && std::isfinite(iv->d) && iv->c < 0.0 && iv->d > 0.0)) {
      throw Error(ErrorCode::NonInteriorOrigin, fmt::format("need c < 0 < d, got ({}, {})", iv->c, iv->d));
    }
    g.measure_ = iv->d - iv->c;
  } else {
    const auto* rc = std::get_if<Rect>(&omega);
    if (rc == nullptr) throw Error(ErrorCode::BadDimension, "N=3 requires a rectangular cross-section");
    if (!(std::isfinite(rc->half_width) && std::isfinite(rc->half_height) && rc->half_width > 0.0 &&
          rc->half_height > 0.0)) {
      throw Error(ErrorCode::NonInteriorOrigin, "rectangle half-widths must be positive");
    }
    g.measure_ = 4.0 * rc->half_width * rc->half_height;
  }
  return g;
}

ThinParams make_thin_params(double r, double h) {
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("r={} not in (0,1)", r));
  if (!(h > 0.0 && h < 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("h={} not in (0,1)", h));
  return {r, h};
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::Finite: return "finite";
    case Regime::Zero: return "zero";
    case Regime::Infinite: return "infinite";
  }
  return "?";
}

double regime_height(const RegimeSpec& regime, int dim, double r) {
  switch (regime.kind) {
    case Regime::Finite: return regime.q * std::pow(r, dim - 1);
    case Regime::Zero: return std::pow(r, dim);
    case Regime::Infinite:
      if (dim == 2) return std::sqrt(r);
      return r * r * std::sqrt(std::log(1.0 / r));
  }
  return 0.0;
}

double volume_ratio(int dim, const ThinParams& p) { return p.h / std::pow(p.r, dim - 1); }

RegimeSchedule make_schedule(const RegimeSpec& regime, const Geometry& geometry, double r0, double rho,
                             int count, int first) {
  if (!(r0 > 0.0 && r0 <= 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("r0={} not in (0,1]", r0));
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("rho={} not in (0,1)", rho));
  if (count < 1) throw Error(ErrorCode::InvalidArgument, fmt::format("count={} must be >= 1", count));
  if (first < 0) throw Error(ErrorCode::InvalidArgument, fmt::format("first={} must be >= 0", first));
  if (regime.kind == Regime::Finite && !(regime.q > 0.0 && std::isfinite(regime.q))) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("finite regime needs q > 0, got {}", regime.q));
  }
  const int dim = geometry.dim();
  RegimeSchedule s;
  s.regime = regime;
  s.r0 = r0;
  s.rho = rho;
  s.first = first;
  s.count = count;
  double prev_ratio = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < count; ++i) {
    const int n = first + i;
    const double r = r0 * std::pow(rho, n);
    const double h = regime_height(regime, dim, r);
    if (!(r > 0.0 && r < 1.0 && h > 0.0 && h < 1.0)) {
      throw Error(ErrorCode::RegimeViolation, fmt::format("n={}: (r,h)=({:.9g},{:.9g}) outside (0,1)^2", n, r, h));
    }
    const ThinParams p{r, h};
    const double ratio = volume_ratio(dim, p);
    if (!std::isnan(prev_ratio)) {
      const bool ok = regime.kind == Regime::Finite    ? std::abs(ratio - prev_ratio) <= 1e-12 * prev_ratio
                      : regime.kind == Regime::Zero    ? ratio < prev_ratio
                                                       : ratio > prev_ratio;
      if (!ok) {
        throw Error(ErrorCode::RegimeViolation,
                    fmt::format("n={}: ratio h/r^(N-1)={:.9g} not monotone toward the {} target", n, ratio,
                                to_string(regime.kind)));
      }
    }
    if (regime.kind == Regime::Infinite && dim == 3) {
      const double lo = r * r;
      const double hi = -r * r * std::log(r);
      if (!(lo < h && h < hi)) {
        throw Error(ErrorCode::RegimeViolation,
                    fmt::format("n={}: window r^2 < h < -r^2 log r empty or violated at r={:.9g} (h={:.9g})", n, r, h));
      }
    }
    prev_ratio = ratio;
    s.entries.push_back({n, p});
  }
  return s;
}

int grading_levels_for(double base_width, double target, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0) || base_width <= target) return 0;
  return static_cast<int>(std::ceil(std::log(target / base_width) / std::log(ratio) - 1e-12));
}

std::int32_t PartGrid::node_count() const {
  std::int32_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::int32_t>(a.size());
  return n;
}

std::int32_t PartGrid::cell_count() const {
  std::int32_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::int32_t>(a.size()) - 1;
  return n;
}

std::int32_t PartGrid::node_index(std::array<std::int32_t, 3> ijk) const {
  std::int32_t idx = 0;
  for (int ax = static_cast<int>(axes.size()) - 1; ax >= 0; --ax) idx = idx * nodes_along(ax) + ijk[ax];
  return node_offset + idx;
}

std::vector<double> cross_section_axis(double lo, double hi, int cells, const Grading& grading) {
  const double len = hi - lo;
  int left = std::max(1, static_cast<int>(std::lround(cells * (-lo) / len)));
  int right = std::max(1, cells - left);
  if (cells >= 2 && left >= cells) left = cells - 1;

  // Widths from the origin outward on one side.
  auto side = [&](double length, int m) {
    const double base = length / m;
    std::vector<double> pts;  // distances from origin, excluding 0
    if (grading.origin_cells > 0 && grading.ratio < 1.0) {
      for (int g = grading.origin_cells; g >= 1; --g) pts.push_back(base * std::pow(grading.ratio, g));
    }
    for (int i = 1; i <= m; ++i) pts.push_back(i == m ? length : base * i);
    return pts;
  };
  const auto neg = side(-lo, left);
  const auto pos = side(hi, right);
  std::vector<double> x;
  x.reserve(neg.size() + pos.size() + 1);
  for (auto it = neg.rbegin(); it != neg.rend(); ++it) x.push_back(-*it);
  x.push_back(0.0);
  for (double p : pos) x.push_back(p);
  x.front() = lo;
  x.back() = hi;
  return x;
}

namespace {

std::vector<double> uniform_axis(double lo, double hi, int cells) {
  std::vector<double> x(cells + 1);
  for (int i = 0; i <= cells; ++i) x[i] = lo + (hi - lo) * i / cells;
  x.back() = hi;
  return x;
}

void check_axis(const std::vector<double>& x, const char* what) {
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i + 1] - x[i] >= kMinCellWidth)) {
      throw Error(ErrorCode::DegenerateCell,
                  fmt::format("{} axis: cell [{:.17g},{:.17g}] narrower than {}", what, x[i], x[i + 1], kMinCellWidth));
    }
  }
}

}  // namespace

Mesh make_mesh(const Geometry& geometry, const MeshLevels& levels, const Grading& grading) {
  if (levels.m_omega < 1 || levels.m_a < 1 || levels.m_b < 1) {
    throw Error(ErrorCode::InvalidArgument, "mesh level counts must be >= 1");
  }
  if (grading.origin_cells < 0 || !(grading.ratio > 0.0 && grading.ratio <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("grading ratio {} not in (0,1]", grading.ratio));
  }
  Mesh mesh;
  mesh.dim_ = geometry.dim();
  mesh.geometry_ = geometry;
  mesh.levels_ = levels;
  mesh.grading_ = grading;
  const int dim = geometry.dim();
  const int ncross = dim - 1;

  mesh.grid_a_.part = Part::A;
  mesh.grid_b_.part = Part::B;
  for (int ax = 0; ax < ncross; ++ax) {
    mesh.grid_a_.axes.push_back(cross_section_axis(geometry.lower(ax), geometry.upper(ax), levels.m_omega, {}));
    mesh.grid_b_.axes.push_back(
        cross_section_axis(geometry.lower(ax), geometry.upper(ax), levels.m_omega, grading));
  }
  mesh.grid_a_.axes.push_back(uniform_axis(0.0, 1.0, levels.m_a));
  mesh.grid_b_.axes.push_back(uniform_axis(-1.0, 0.0, levels.m_b));
  for (const auto& a : mesh.grid_a_.axes) check_axis(a, "part A");
  for (const auto& a : mesh.grid_b_.axes) check_axis(a, "part B");

  mesh.grid_a_.node_offset = 0;
  mesh.grid_b_.node_offset = mesh.grid_a_.node_count();

  auto emit_part = [&](const PartGrid& g) {
    const std::int32_t nx = g.nodes_along(0);
    const std::int32_t ny = ncross == 2 ? g.nodes_along(1) : 1;
    const std::int32_t nz = g.nodes_along(dim - 1);
    const auto& zax = g.axes[dim - 1];
    for (std::int32_t k = 0; k < nz; ++k) {
      for (std::int32_t j = 0; j < ny; ++j) {
        for (std::int32_t i = 0; i < nx; ++i) {
          Node node;
          node.part = g.part;
          node.xp[0] = g.axes[0][i];
          if (ncross == 2) node.xp[1] = g.axes[1][j];
          node.xn = zax[k];
          const bool on_lateral = i == 0 || i == nx - 1 || (ncross == 2 && (j == 0 || j == ny - 1));
          if (g.part == Part::A) {
            if (k == nz - 1) node.tags |= tags::kDirichletTop;
            if (k == 0) node.tags |= tags::kJunctionA;
          } else {
            if (on_lateral) node.tags |= tags::kDirichletLateralB;
            if (k == nz - 1) node.tags |= tags::kJunctionBSurface;
          }
          mesh.nodes_.push_back(node);
        }
      }
    }
    const std::int32_t ycells = ncross == 2 ? ny - 1 : 1;
    for (std::int32_t k = 0; k + 1 < nz; ++k) {
      for (std::int32_t j = 0; j < ycells; ++j) {
        for (std::int32_t i = 0; i + 1 < nx; ++i) {
          Element e;
          e.part = g.part;
          const int corners = 1 << dim;
          for (int c = 0; c < corners; ++c) {
            const std::int32_t di = c & 1;
            const std::int32_t dj = ncross == 2 ? (c >> 1) & 1 : 0;
            const std::int32_t dk = (c >> ncross) & 1;
            e.nodes[c] = g.node_index({i + di, ncross == 2 ? j + dj : k + dk, k + dk});
          }
          e.lo[0] = g.axes[0][i];
          e.hi[0] = g.axes[0][i + 1];
          if (ncross == 2) {
            e.lo[1] = g.axes[1][j];
            e.hi[1] = g.axes[1][j + 1];
          }
          e.lo[dim - 1] = zax[k];
          e.hi[dim - 1] = zax[k + 1];
          mesh.elements_.push_back(e);
        }
      }
    }
  };
  emit_part(mesh.grid_a_);
  emit_part(mesh.grid_b_);
  return mesh;
}

double Mesh::part_volume(Part p) const {
  double v = 0.0;
  for (const auto& e : elements_) {
    if (e.part != p) continue;
    double cell = 1.0;
    for (int ax = 0; ax < dim_; ++ax) cell *= e.hi[ax] - e.lo[ax];
    v += cell;
  }
  return v;
}

double Mesh::smallest_origin_width() const {
  double w = std::numeric_limits<double>::infinity();
  for (int ax = 0; ax + 1 < dim_; ++ax) {
    const auto& x = grid_b_.axes[ax];
    const auto it = std::lower_bound(x.begin(), x.end(), 0.0);
    const auto i = static_cast<std::size_t>(it - x.begin());
    if (i > 0) w = std::min(w, x[i] - x[i - 1]);
    if (i + 1 < x.size()) w = std::min(w, x[i + 1] - x[i]);
  }
  return w;
}

std::string Mesh::signature() const {
  return fmt::format("m{}x{}x{}g{}", levels_.m_omega, levels_.m_a, levels_.m_b, grading_.origin_cells);
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const int dim = mesh.dim();
  fmt::print(os, "mesh dim {} nodes {} elements {}\n", dim, mesh.node_count(), mesh.elements().size());
  for (std::size_t i = 0; i < mesh.nodes().size(); ++i) {
    const Node& n = mesh.nodes()[i];
    if (dim == 2) {
      fmt::print(os, "node {} {} {:.9g} {:.9g} {}\n", i, n.part == Part::A ? 'A' : 'B', n.xp[0], n.xn, n.tags);
    } else {
      fmt::print(os, "node {} {} {:.9g} {:.9g} {:.9g} {}\n", i, n.part == Part::A ? 'A' : 'B', n.xp[0], n.xp[1],
                 n.xn, n.tags);
    }
  }
  const int corners = 1 << dim;
  for (std::size_t i = 0; i < mesh.elements().size(); ++i) {
    const Element& e = mesh.elements()[i];
    fmt::print(os, "elem {} {}", i, e.part == Part::A ? 'A' : 'B');
    for (int c = 0; c < corners; ++c) fmt::print(os, " {}", e.nodes[c]);
    os << '\n';
  }
}

}  // namespace thinspectra
